#include "lstat/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lstat/errors.hpp"

namespace lstat {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2Pi = std::sqrt(2.0 * kPi);
// Tail tolerance of ghat relative to its peak.
constexpr double kTailTolerance = 1e-12;

}  // namespace

// ---------------------------------------------------------------- FourierPoly

FourierPoly FourierPoly::from_coeffs(Coeffs coeffs) {
  FourierPoly p;
  p.exact_.reset();
  for (auto& [k, c] : coeffs)
    if (c != std::complex<double>(0.0, 0.0)) p.coeffs_.emplace(k, c);
  p.finish();
  return p;
}

FourierPoly FourierPoly::from_exact(ExactCoeffs coeffs) {
  FourierPoly p;
  ExactCoeffs kept;
  for (auto& [k, c] : coeffs)
    if (!c.is_zero()) kept.emplace(k, std::move(c));
  for (const auto& [k, c] : kept) p.coeffs_.emplace(k, c.to_complex());
  p.exact_ = std::move(kept);
  p.finish();
  return p;
}

FourierPoly FourierPoly::constant(const Rational& c) {
  ExactCoeffs m;
  m.emplace(0, ComplexRational(c));
  return from_exact(std::move(m));
}

void FourierPoly::finish() {
  degree_ = 0;
  for (const auto& [k, c] : coeffs_) degree_ = std::max(degree_, std::abs(k));

  real_ = true;
  even_ = true;
  if (exact_) {
    for (const auto& [k, c] : *exact_) {
      ComplexRational mirror = exact_coeff(-k);
      if (!(mirror == c.conj())) real_ = false;
      if (!(mirror == c)) even_ = false;
    }
  } else {
    for (const auto& [k, c] : coeffs_) {
      std::complex<double> mirror = coeff(-k);
      if (mirror != std::conj(c)) real_ = false;
      if (mirror != c) even_ = false;
    }
  }
}

std::complex<double> FourierPoly::coeff(int k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? std::complex<double>{} : it->second;
}

const FourierPoly::ExactCoeffs& FourierPoly::exact_coeffs() const {
  if (!exact_) throw DomainError("poly has no exact coefficients");
  return *exact_;
}

ComplexRational FourierPoly::exact_coeff(int k) const {
  const auto& m = exact_coeffs();
  auto it = m.find(k);
  return it == m.end() ? ComplexRational{} : it->second;
}

std::complex<double> FourierPoly::operator()(double x) const {
  std::complex<double> sum{};
  for (const auto& [k, c] : coeffs_) sum += c * std::polar(1.0, k * x);
  return sum;
}

double FourierPoly::abs_sum() const {
  double s = 0.0;
  for (const auto& [k, c] : coeffs_) s += std::abs(c);
  return s;
}

std::string FourierPoly::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  bool first = true;
  for (const auto& [k, c] : coeffs_) {
    if (!first) os << ',';
    first = false;
    os << '[' << k << ',' << c.real() << ',' << c.imag() << ']';
  }
  os << ']';
  return os.str();
}

FourierPoly make_poly(const std::vector<std::pair<int, std::complex<double>>>& pairs) {
  FourierPoly::Coeffs m;
  for (const auto& [k, c] : pairs)
    if (!m.emplace(k, c).second) throw ValidationError("duplicate frequency " + std::to_string(k));
  return FourierPoly::from_coeffs(std::move(m));
}

FourierPoly make_poly(const std::vector<std::pair<int, ComplexRational>>& pairs) {
  FourierPoly::ExactCoeffs m;
  for (const auto& [k, c] : pairs)
    if (!m.emplace(k, c).second) throw ValidationError("duplicate frequency " + std::to_string(k));
  return FourierPoly::from_exact(std::move(m));
}

FourierPoly convolve(const FourierPoly& a, const FourierPoly& b) {
  if (a.is_exact() && b.is_exact()) {
    FourierPoly::ExactCoeffs out;
    for (const auto& [i, x] : a.exact_coeffs())
      for (const auto& [j, y] : b.exact_coeffs()) out[i + j] += x * y;
    return FourierPoly::from_exact(std::move(out));
  }
  FourierPoly::Coeffs out;
  for (const auto& [i, x] : a.coeffs())
    for (const auto& [j, y] : b.coeffs()) out[i + j] += x * y;
  return FourierPoly::from_coeffs(std::move(out));
}

FourierPoly convolve_power(const FourierPoly& f, int power) {
  if (power < 0) throw ValidationError("convolve_power needs a nonnegative exponent");
  FourierPoly out = FourierPoly::constant(1);
  if (!f.is_exact()) out = FourierPoly::from_coeffs({{0, 1.0}});
  for (int i = 0; i < power; ++i) out = convolve(out, f);
  return out;
}

FourierPoly symmetrize_even(const FourierPoly& f) {
  if (f.is_exact()) {
    FourierPoly::ExactCoeffs out;
    for (const auto& [k, c] : f.exact_coeffs()) {
      out[k] += c;
      out[-k] += c;
    }
    return FourierPoly::from_exact(std::move(out));
  }
  FourierPoly::Coeffs out;
  for (const auto& [k, c] : f.coeffs()) {
    out[k] += c;
    out[-k] += c;
  }
  // the two contributions to c_k are added in a fixed order, so out[k] and
  // out[-k] are bit-identical
  return FourierPoly::from_coeffs(std::move(out));
}

FourierPoly scale(const FourierPoly& f, const Rational& factor) {
  if (f.is_exact()) {
    FourierPoly::ExactCoeffs out;
    ComplexRational s(factor);
    for (const auto& [k, c] : f.exact_coeffs()) out.emplace(k, c * s);
    return FourierPoly::from_exact(std::move(out));
  }
  FourierPoly::Coeffs out;
  double s = factor.get_d();
  for (const auto& [k, c] : f.coeffs()) out.emplace(k, c * s);
  return FourierPoly::from_coeffs(std::move(out));
}

int symbol_point_count(const FourierPoly& f, double t, int band) {
  const int d = f.degree();
  const double at = std::abs(t);
  // exp(t f) has Fourier mass out to roughly deg * (|t| * sum|c_k|) frequencies
  int spread = std::max({1, static_cast<int>(std::ceil(at * d)),
                         static_cast<int>(std::ceil(4.0 * at * f.abs_sum()))});
  return std::max(64, 8 * (band + d * spread));
}

std::vector<std::complex<double>> exp_symbol_coeffs(const FourierPoly& f, double t, int band) {
  if (!f.real_valued()) throw ValidationError("exp_symbol_coeffs needs a real-valued symbol");
  if (band < 0) throw ValidationError("band must be nonnegative");
  if (t == 0 || f.degree() == 0) {
    std::vector<std::complex<double>> out(2 * band + 1, 0.0);
    out[band] = std::exp(t * f.coeff(0).real());
    return out;
  }

  const int npts = symbol_point_count(f, t, band);
  std::vector<double> weight(npts);
  for (int q = 0; q < npts; ++q) {
    double x = -kPi + 2.0 * kPi * q / npts;
    weight[q] = std::exp(t * f.value(x)) / npts;
  }

  std::vector<std::complex<double>> out(2 * band + 1);
  for (int m = 0; m <= band; ++m) {
    std::complex<double> acc{};
    for (int q = 0; q < npts; ++q) {
      double x = -kPi + 2.0 * kPi * q / npts;
      acc += weight[q] * std::polar(1.0, -m * x);
    }
    if (m == 0) acc = {acc.real(), 0.0};
    out[band + m] = acc;
    out[band - m] = std::conj(acc);
  }
  return out;
}

// --------------------------------------------------------- LocalTestFunction

LocalTestFunction LocalTestFunction::triangle(double width, double height) {
  if (!(width > 0)) throw ValidationError("triangle width must be positive");
  LocalTestFunction g;
  g.family_ = LocalFamily::triangle;
  g.a_ = width;
  g.b_ = height;
  return g;
}

LocalTestFunction LocalTestFunction::gauss(double sigma) {
  if (!(sigma > 0)) throw ValidationError("gauss sigma must be positive");
  LocalTestFunction g;
  g.family_ = LocalFamily::gauss;
  g.a_ = sigma;
  return g;
}

LocalTestFunction LocalTestFunction::sinc2(double width) {
  if (!(width > 0)) throw ValidationError("sinc2 width must be positive");
  LocalTestFunction g;
  g.family_ = LocalFamily::sinc2;
  g.a_ = width;
  return g;
}

LocalTestFunction LocalTestFunction::table(std::vector<double> knots, std::vector<double> values) {
  if (knots.empty() || knots.size() != values.size())
    throw ValidationError("table needs matching, nonempty knot and value lists");
  if (knots.front() != 0.0) throw ValidationError("table knots must start at t = 0");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw ValidationError("table knots must increase strictly");
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("table values must be finite");
  LocalTestFunction g;
  g.family_ = LocalFamily::table;
  g.knots_ = std::move(knots);
  g.values_ = std::move(values);
  return g;
}

std::string LocalTestFunction::family_name() const {
  switch (family_) {
    case LocalFamily::triangle: return "triangle";
    case LocalFamily::gauss: return "gauss";
    case LocalFamily::sinc2: return "sinc2";
    case LocalFamily::table: return "table";
  }
  return "table";
}

std::map<std::string, double> LocalTestFunction::params() const {
  switch (family_) {
    case LocalFamily::triangle: return {{"width", a_}, {"height", b_}};
    case LocalFamily::gauss: return {{"sigma", a_}};
    case LocalFamily::sinc2: return {{"width", a_}};
    case LocalFamily::table: return {};
  }
  return {};
}

double LocalTestFunction::ghat(double t) const {
  const double at = std::abs(t);
  switch (family_) {
    case LocalFamily::triangle: return b_ * std::max(0.0, 1.0 - at / a_);
    case LocalFamily::gauss: return std::exp(-at * at / (2.0 * a_ * a_));
    case LocalFamily::sinc2:
      return std::sqrt(kPi / 2.0) / a_ * std::max(0.0, 1.0 - at / (2.0 * a_));
    case LocalFamily::table: {
      if (at > knots_.back()) return 0.0;
      if (knots_.size() == 1) return values_[0];
      auto it = std::upper_bound(knots_.begin(), knots_.end(), at);
      if (it == knots_.end()) return values_.back();
      std::size_t i = static_cast<std::size_t>(it - knots_.begin());
      double w = (at - knots_[i - 1]) / (knots_[i] - knots_[i - 1]);
      return values_[i - 1] + w * (values_[i] - values_[i - 1]);
    }
  }
  return 0.0;
}

namespace {

// \int_a^b (p + q t) cos(t x) dt
double linear_cos_integral(double a, double b, double p, double q, double x) {
  if (std::abs(x) * std::max(std::abs(a), std::abs(b)) < 1.0) {
    // 8-point Gauss-Legendre; the integrand is entire with a small phase
    static constexpr double node[4] = {0.1834346424956498, 0.5255324099163290,
                                       0.7966664774136267, 0.9602898564975363};
    static constexpr double wt[4] = {0.3626837833783620, 0.3137066458778873,
                                     0.2223810344533745, 0.1012285362903763};
    double mid = 0.5 * (a + b), half = 0.5 * (b - a), s = 0.0;
    for (int i = 0; i < 4; ++i)
      for (double sign : {-1.0, 1.0}) {
        double t = mid + sign * half * node[i];
        s += wt[i] * (p + q * t) * std::cos(t * x);
      }
    return s * half;
  }
  auto prim = [&](double t) {
    return (p + q * t) * std::sin(t * x) / x + q * std::cos(t * x) / (x * x);
  };
  return prim(b) - prim(a);
}

}  // namespace

double LocalTestFunction::g(double x) const {
  switch (family_) {
    case LocalFamily::triangle: {
      double y = 0.5 * a_ * x;
      double s = y == 0.0 ? 1.0 : std::sin(y) / y;
      return b_ * a_ / kSqrt2Pi * s * s;
    }
    case LocalFamily::gauss: return a_ * std::exp(-0.5 * a_ * a_ * x * x);
    case LocalFamily::sinc2: {
      double y = a_ * x;
      double s = y == 0.0 ? 1.0 : std::sin(y) / y;
      return s * s;
    }
    case LocalFamily::table: {
      double sum = 0.0;
      for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
        double a = knots_[i], b = knots_[i + 1];
        double q = (values_[i + 1] - values_[i]) / (b - a);
        double p = values_[i] - q * a;
        sum += linear_cos_integral(a, b, p, q, x);
      }
      return 2.0 * sum / kSqrt2Pi;
    }
  }
  return 0.0;
}

double LocalTestFunction::support_bound() const {
  switch (family_) {
    case LocalFamily::triangle: return a_;
    case LocalFamily::gauss: return a_ * std::sqrt(-2.0 * std::log(kTailTolerance));
    case LocalFamily::sinc2: return 2.0 * a_;
    case LocalFamily::table: return knots_.back();
  }
  return 0.0;
}

std::vector<double> LocalTestFunction::breakpoints() const {
  switch (family_) {
    case LocalFamily::table: return knots_;
    default: return {0.0, support_bound()};
  }
}

double LocalTestFunction::integral() const { return kSqrt2Pi * ghat(0.0); }

int effective_support(const LocalTestFunction& g, double L) {
  return static_cast<int>(std::floor(L * g.support_bound()));
}

FourierPoly localize(const LocalTestFunction& g, double L, double theta0, int band) {
  if (!(L >= 1.0)) throw ValidationError("localization scale L must be >= 1");
  const int need = effective_support(g, L);
  if (band < need)
    throw ValidationError("band " + std::to_string(band) + " below effective support " +
                          std::to_string(need));
  const int top = std::min(band, need);
  FourierPoly::Coeffs out;
  const double norm = 1.0 / (kSqrt2Pi * L);
  for (int k = 0; k <= top; ++k) {
    double amp = g.ghat(k / L) * norm;
    if (amp == 0.0) continue;
    std::complex<double> c = amp * std::polar(1.0, -k * theta0);
    if (k == 0) {
      out.emplace(0, amp);
    } else {
      out.emplace(k, c);
      out.emplace(-k, std::conj(c));
    }
  }
  return FourierPoly::from_coeffs(std::move(out));
}

double variance_limit_local(const LocalTestFunction& g) {
  using boost::math::quadrature::gauss_kronrod;
  std::vector<double> bp = g.breakpoints();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    auto integrand = [&](double t) {
      double v = g.ghat(t);
      return v * v * t;
    };
    double err = 0.0;
    total += gauss_kronrod<double, 61>::integrate(integrand, bp[i], bp[i + 1], 15, 1e-14, &err);
  }
  // (1/2pi) * 2 * \int_0^inf, ghat being even
  double v = total / kPi;
  if (!std::isfinite(v)) throw DomainError("variance integral diverges");
  return v;
}

}  // namespace lstat
