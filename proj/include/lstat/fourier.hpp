#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lstat/rational.hpp"

namespace lstat {

// Finitely supported Fourier series  f(x) = sum_k c_k e^{ikx}  on the circle.
//
// Coefficients are always available in double precision. When the poly was
// built from exact data, an exact copy is carried along and every operation
// that can stay exact (convolution powers, symmetrization) keeps it.
class FourierPoly {
 public:
  using Coeffs = std::map<int, std::complex<double>>;
  using ExactCoeffs = std::map<int, ComplexRational>;

  FourierPoly() : exact_(ExactCoeffs{}) {}

  static FourierPoly from_coeffs(Coeffs coeffs);
  static FourierPoly from_exact(ExactCoeffs coeffs);
  static FourierPoly constant(const Rational& c);

  std::complex<double> coeff(int k) const;
  const Coeffs& coeffs() const { return coeffs_; }

  bool is_exact() const { return exact_.has_value(); }
  const ExactCoeffs& exact_coeffs() const;  // throws DomainError when float-only
  ComplexRational exact_coeff(int k) const;

  int degree() const { return degree_; }
  bool real_valued() const { return real_; }
  bool even() const { return even_; }
  bool is_zero() const { return coeffs_.empty(); }

  std::complex<double> operator()(double x) const;
  // Real part of the evaluation, for real-valued polys.
  double value(double x) const { return (*this)(x).real(); }

  // Sum of |c_k|; bounds sup |f|.
  double abs_sum() const;

  // [[k, re, im], ...] in increasing k.
  std::string describe() const;

 private:
  void finish();

  Coeffs coeffs_;
  std::optional<ExactCoeffs> exact_;
  int degree_ = 0;
  bool real_ = true;
  bool even_ = true;
};

FourierPoly make_poly(const std::vector<std::pair<int, std::complex<double>>>& pairs);
FourierPoly make_poly(const std::vector<std::pair<int, ComplexRational>>& pairs);

FourierPoly convolve(const FourierPoly& a, const FourierPoly& b);
// Coefficients of f^power. power == 0 yields the constant 1.
FourierPoly convolve_power(const FourierPoly& f, int power);
// h(x) = f(x) + f(-x).
FourierPoly symmetrize_even(const FourierPoly& f);
FourierPoly scale(const FourierPoly& f, const Rational& factor);

// Trapezoid point count used for the symbol of exp(t f) with coefficients
// wanted up to |m| <= band.
int symbol_point_count(const FourierPoly& f, double t, int band);

// m-th Fourier coefficients of exp(t f) for m = -band..band (index m + band).
std::vector<std::complex<double>> exp_symbol_coeffs(const FourierPoly& f, double t, int band);

enum class LocalFamily { triangle, gauss, sinc2, table };

// A test function g on the real line, described by its Fourier transform
//   g(x) = (2 pi)^{-1/2} \int ghat(t) e^{itx} dt.
// All built-in families are real and even, so ghat is real and even too.
class LocalTestFunction {
 public:
  // ghat(t) = height * max(0, 1 - |t| / width)
  static LocalTestFunction triangle(double width = 1.0, double height = 1.0);
  // ghat(t) = exp(-t^2 / (2 sigma^2)),  g(x) = sigma exp(-sigma^2 x^2 / 2)
  static LocalTestFunction gauss(double sigma = 1.0);
  // g(x) = (sin(w x) / (w x))^2,  ghat supported on |t| <= 2w
  static LocalTestFunction sinc2(double width = 1.0);
  // ghat piecewise linear through (knots[i], values[i]) for t >= 0, mirrored
  // to t < 0 and zero beyond the last knot. knots[0] must be 0.
  static LocalTestFunction table(std::vector<double> knots, std::vector<double> values);
  static LocalTestFunction zero() { return table({0.0}, {0.0}); }

  LocalFamily family() const { return family_; }
  std::string family_name() const;
  std::map<std::string, double> params() const;
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

  double ghat(double t) const;
  double g(double x) const;
  // ghat(t) is below 1e-12 of its peak (zero for compact families) past this.
  double support_bound() const;
  // Breakpoints of ghat on [0, support_bound()], for piecewise quadrature.
  std::vector<double> breakpoints() const;
  // \int g(x) dx = sqrt(2 pi) ghat(0).
  double integral() const;

 private:
  LocalFamily family_ = LocalFamily::table;
  double a_ = 1.0;  // width / sigma
  double b_ = 1.0;  // height
  std::vector<double> knots_;
  std::vector<double> values_;
};

// Largest circle frequency kept when g(L x) is periodized.
int effective_support(const LocalTestFunction& g, double L);

// Circle Fourier series of the 2 pi-periodization of x -> g(L (x - theta0)).
// Its coefficients are ghat(k / L) e^{-ik theta0} / (sqrt(2 pi) L).
FourierPoly localize(const LocalTestFunction& g, double L, double theta0, int band);

// (1/2pi) \int |ghat(t)|^2 |t| dt.
double variance_limit_local(const LocalTestFunction& g);

}  // namespace lstat
