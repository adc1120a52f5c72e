#pragma once

#include <gmpxx.h>

#include <complex>
#include <string>

namespace lstat {

// Exact scalar for every combinatorial identity. mpq_class keeps the
// denominator positive and the fraction reduced after each operation.
using Rational = mpq_class;
using BigInt = mpz_class;

Rational rational_from_string(const std::string& text);  // "p", "p/q" or a decimal
Rational rational_from_double(double value);              // exact binary value
std::string to_string(const Rational& q);
BigInt factorial(unsigned k);

struct ComplexRational {
  Rational re;
  Rational im;

  ComplexRational() = default;
  ComplexRational(Rational r, Rational i = 0) : re(std::move(r)), im(std::move(i)) {}

  ComplexRational conj() const { return {re, -im}; }
  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
  std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }

  ComplexRational& operator+=(const ComplexRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  ComplexRational& operator-=(const ComplexRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  ComplexRational& operator*=(const ComplexRational& o) {
    Rational r = re * o.re - im * o.im;
    Rational i = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(i);
    return *this;
  }
  friend ComplexRational operator+(ComplexRational a, const ComplexRational& b) { return a += b; }
  friend ComplexRational operator-(ComplexRational a, const ComplexRational& b) { return a -= b; }
  friend ComplexRational operator*(ComplexRational a, const ComplexRational& b) { return a *= b; }
  friend bool operator==(const ComplexRational& a, const ComplexRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

}  // namespace lstat
