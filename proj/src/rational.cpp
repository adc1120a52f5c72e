#include "lstat/rational.hpp"

#include <cctype>
#include <cmath>

#include "lstat/errors.hpp"

namespace lstat {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

Rational rational_from_string(const std::string& text) {
  std::string s = text;
  if (s.empty()) throw ValidationError("empty rational literal");
  bool negative = false;
  std::size_t pos = 0;
  if (s[0] == '+' || s[0] == '-') {
    negative = s[0] == '-';
    pos = 1;
  }
  std::string body = s.substr(pos);

  Rational out;
  auto slash = body.find('/');
  if (slash != std::string::npos) {
    std::string num = body.substr(0, slash);
    std::string den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) throw ValidationError("bad rational literal: " + text);
    BigInt d(den);
    if (d == 0) throw ValidationError("zero denominator: " + text);
    out = Rational(BigInt(num), d);
    out.canonicalize();
  } else {
    // decimal with optional fraction and exponent
    std::string mantissa = body;
    long exponent = 0;
    auto e = body.find_first_of("eE");
    if (e != std::string::npos) {
      mantissa = body.substr(0, e);
      std::string ex = body.substr(e + 1);
      try {
        exponent = std::stol(ex);
      } catch (...) {
        throw ValidationError("bad exponent in literal: " + text);
      }
    }
    std::string digits = mantissa;
    auto dot = mantissa.find('.');
    if (dot != std::string::npos) {
      digits = mantissa.substr(0, dot) + mantissa.substr(dot + 1);
      exponent -= static_cast<long>(mantissa.size() - dot - 1);
    }
    if (!all_digits(digits)) throw ValidationError("bad numeric literal: " + text);
    if (std::labs(exponent) > 4000) throw ValidationError("exponent out of range: " + text);
    out = Rational(BigInt(digits));
    BigInt ten_pow;
    mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent)));
    if (exponent >= 0)
      out *= ten_pow;
    else
      out /= ten_pow;
    out.canonicalize();
  }
  return negative ? Rational(-out) : out;
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw ValidationError("non-finite value has no rational form");
  Rational q;
  mpq_set_d(q.get_mpq_t(), value);
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

BigInt factorial(unsigned k) {
  BigInt out;
  mpz_fac_ui(out.get_mpz_t(), k);
  return out;
}

}  // namespace lstat
