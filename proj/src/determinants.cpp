#include "lstat/determinants.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "lstat/errors.hpp"
#include "lstat/linalg.hpp"
#include "lstat/rational.hpp"

namespace lstat {

namespace {

constexpr double pi = std::numbers::pi;

namespace mp = boost::multiprecision;
using HighReal = mp::number<mp::cpp_bin_float<130>, mp::et_off>;
using HighComplex = mp::number<mp::complex_adaptor<mp::cpp_bin_float<130>>, mp::et_off>;

double checked_real(std::complex<double> det, const char* what) {
  if (std::abs(det.imag()) > 1e-9 * std::abs(det))
    throw NumericalError(std::string(what) + ": determinant has a non-negligible imaginary part",
                         std::abs(det.imag()));
  if (!(det.real() > 0)) throw NumericalError(std::string(what) + ": determinant is not positive", det.real());
  return det.real();
}

// Nodes and weights of the one-dimensional rule used for the ensemble domain:
// periodic trapezoid on [-pi, pi) for unitary, endpoint-halved trapezoid on
// [0, pi] otherwise (exact on even trigonometric polynomials of low degree).
void axis_rule(const Ensemble& e, int points, std::vector<double>& x, std::vector<double>& w) {
  x.clear();
  w.clear();
  if (e.is_unitary()) {
    for (int q = 0; q < points; ++q) {
      x.push_back(-pi + 2 * pi * q / points);
      w.push_back(2 * pi / points);
    }
    return;
  }
  for (int q = 0; q <= points; ++q) {
    x.push_back(pi * q / points);
    w.push_back((q == 0 || q == points ? 0.5 : 1.0) * pi / points);
  }
}

double weyl_tensor_sum(const Ensemble& e, const std::function<double(double)>& per_angle, int points) {
  const int n = e.n;
  if (n > 3) throw ResourceError("Weyl quadrature is limited to n <= 3");
  std::vector<double> x, w;
  axis_rule(e, points, x, w);
  const std::size_t m = x.size();

  double constant = 0;
  double nfact = n == 3 ? 6 : n;
  switch (e.kind) {
    case EnsembleKind::unitary: constant = 1 / (std::pow(2 * pi, n) * nfact); break;
    case EnsembleKind::so_even: constant = 2 / (std::pow(2 * pi, n) * nfact); break;
    case EnsembleKind::so_odd:
    case EnsembleKind::symplectic: constant = std::pow(2 / pi, n) / nfact; break;
  }

  std::vector<double> v(m);
  for (std::size_t a = 0; a < m; ++a) {
    double single = 1;
    if (e.kind == EnsembleKind::so_odd) single = std::pow(std::sin(x[a] / 2), 2);
    if (e.kind == EnsembleKind::symplectic) single = std::pow(std::sin(x[a]), 2);
    v[a] = w[a] * single * per_angle(x[a]);
  }
  if (n == 1) {
    double s = 0;
    for (std::size_t a = 0; a < m; ++a) s += v[a];
    return constant * s;
  }

  std::vector<double> pair(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      if (e.is_unitary()) {
        pair[a * m + b] = 2 - 2 * std::cos(x[a] - x[b]);
      } else {
        const double d = 2 * std::cos(x[a]) - 2 * std::cos(x[b]);
        pair[a * m + b] = d * d;
      }
    }

  double total = 0;
  for (std::size_t a = 0; a < m; ++a) {
    if (v[a] == 0) continue;
    double row = 0;
    for (std::size_t b = 0; b < m; ++b) {
      const double ab = v[b] * pair[a * m + b];
      if (ab == 0) continue;
      if (n == 2) {
        row += ab;
        continue;
      }
      double inner = 0;
      for (std::size_t c = 0; c < m; ++c) inner += v[c] * pair[a * m + c] * pair[b * m + c];
      row += ab * inner;
    }
    total += v[a] * row;
  }
  return constant * total;
}

std::vector<std::vector<Rational>> vandermonde_inverse(int half) {
  const int size = 2 * half + 1;
  // rows: node j = -half..half, columns: power p
  std::vector<std::vector<Rational>> a(size, std::vector<Rational>(2 * size));
  for (int r = 0; r < size; ++r) {
    Rational node = r - half;
    Rational pw = 1;
    for (int p = 0; p < size; ++p) {
      a[r][p] = pw;
      pw *= node;
    }
    a[r][size + r] = 1;
  }
  for (int col = 0; col < size; ++col) {
    int piv = col;
    while (sgn(a[piv][col]) == 0) ++piv;
    std::swap(a[piv], a[col]);
    const Rational p = a[col][col];
    for (auto& x : a[col]) x /= p;
    for (int r = 0; r < size; ++r) {
      if (r == col || sgn(a[r][col]) == 0) continue;
      const Rational factor = a[r][col];
      for (int c = 0; c < 2 * size; ++c) a[r][c] -= factor * a[col][c];
    }
  }
  // V b = y with V[r][p] = node_r^p, so b = V^{-1} y; return V^{-1}[p][r]
  std::vector<std::vector<Rational>> inv(size, std::vector<Rational>(size));
  for (int p = 0; p < size; ++p)
    for (int r = 0; r < size; ++r) inv[p][r] = a[p][size + r];
  return inv;
}

std::vector<double> interpolated_cumulants(const std::function<long double(double)>& log_mgf, int ell_max,
                                          double h) {
  const auto inv = vandermonde_inverse(ell_max);
  const int size = 2 * ell_max + 1;
  std::vector<long double> y(size);
  for (int r = 0; r < size; ++r) y[r] = r == ell_max ? 0.0L : log_mgf((r - ell_max) * h);
  std::vector<double> out;
  long double hp = 1, fact = 1;
  for (int p = 1; p <= ell_max; ++p) {
    hp *= h;
    fact *= p;
    long double b = 0;
    for (int r = 0; r < size; ++r) {
      const long double w = static_cast<long double>(inv[p][r].get_num().get_d()) / inv[p][r].get_den().get_d();
      b += w * y[r];
    }
    out.push_back(static_cast<double>(fact * b / hp));
  }
  return out;
}

template <class Real, class Complex>
Complex toeplitz_det_generic(const std::vector<Complex>& c, int n) {
  const int band = n - 1;
  DenseMatrix<Complex> m(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) m(j, k) = c[j - k + band];
  return lu_determinant<Complex, Real>(std::move(m), Real(64) * std::numeric_limits<Real>::epsilon());
}

// Symbol coefficients of exp(t f) by the trapezoid rule, carried out in the
// arithmetic of Real/Complex.
template <class Real, class Complex>
std::vector<Complex> exp_symbol_coeffs_in(const FourierPoly& f, double t, int band) {
  using std::cos;
  using std::exp;
  using std::sin;
  if (t == 0 || f.degree() == 0) {
    // e^{tf} is constant: a single exact coefficient
    std::vector<Complex> out(2 * band + 1, Complex(0));
    out[band] = Complex(exp(Real(t) * Real(f.coeff(0).real())));
    return out;
  }
  const int npts = symbol_point_count(f, t, band);
  const Real rpi = boost::math::constants::pi<Real>();
  std::vector<Real> x(npts), weight(npts);
  const Real rt(t);
  for (int q = 0; q < npts; ++q) {
    x[q] = -rpi + 2 * rpi * q / npts;
    Real fx(0);
    for (const auto& [k, c] : f.coeffs()) {
      const Real arg = x[q] * k;
      fx += Real(c.real()) * cos(arg) - Real(c.imag()) * sin(arg);
    }
    weight[q] = exp(rt * fx) / npts;
  }
  std::vector<Complex> out(2 * band + 1);
  for (int m = 0; m <= band; ++m) {
    Real re(0), im(0);
    for (int q = 0; q < npts; ++q) {
      const Real arg = x[q] * m;
      re += weight[q] * cos(arg);
      im -= weight[q] * sin(arg);
    }
    if (m == 0) im = 0;
    out[band + m] = Complex(re, im);
    out[band - m] = Complex(re, -im);
  }
  return out;
}

HighReal szego_prediction_high(const FourierPoly& f, double t, int n) {
  HighReal s2(0);
  for (const auto& [k, c] : f.coeffs()) {
    const HighComplex hc(HighReal(c.real()), HighReal(c.imag()));
    s2 += std::abs(k) * (hc.real() * hc.real() + hc.imag() * hc.imag());
  }
  const HighReal ht(t);
  return ht * n * HighReal(f.coeff(0).real()) + ht * ht / 2 * s2;
}

}  // namespace

std::string method_name(MgfMethod m) {
  switch (m) {
    case MgfMethod::toeplitz: return "toeplitz";
    case MgfMethod::fredholm: return "fredholm";
    case MgfMethod::weyl_quadrature: return "weyl-quadrature";
  }
  return "?";
}

double toeplitz_mgf(const FourierPoly& f, double t, int n) {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (!f.real_valued()) throw ValidationError("toeplitz_mgf needs a real-valued symbol");
  const auto c = exp_symbol_coeffs(f, t, n - 1);
  return checked_real(toeplitz_det_generic<double>(c, n), "toeplitz_mgf");
}

double fredholm_mgf(const Ensemble& e, const FourierPoly& f, double t) {
  if (!f.real_valued()) throw ValidationError("fredholm_mgf needs a real-valued test function");
  if (!e.is_unitary() && !f.even()) throw ValidationError("odd test function for a non-unitary ensemble");
  const ProjectionBasis basis(e);
  const int intervals = symbol_point_count(f, t, 2 * e.n);
  auto m = multiplier_matrix(basis, [&](double x) { return std::expm1(t * f.value(x)); }, intervals);
  for (int j = 0; j < e.n; ++j) m(j, j) += 1.0;
  return checked_real(lu_determinant(std::move(m)), "fredholm_mgf");
}

double weyl_quadrature_mgf(const Ensemble& e, const FourierPoly& f, double t, int points_per_axis) {
  if (!f.real_valued()) throw ValidationError("weyl_quadrature_mgf needs a real-valued test function");
  if (points_per_axis < 256) throw ValidationError("Weyl quadrature needs at least 256 points per axis");
  return weyl_tensor_sum(e, [&](double x) { return std::exp(t * f.value(x)); }, points_per_axis);
}

double weyl_normalization(const Ensemble& e, int points_per_axis) {
  return weyl_tensor_sum(e, [](double) { return 1.0; }, points_per_axis);
}

MgfEvaluation evaluate_mgf(const Ensemble& e, const FourierPoly& f, double t) {
  MgfEvaluation out;
  out.ensemble = e;
  out.f = f.describe();
  out.t = t;
  if (e.is_unitary()) {
    out.method = MgfMethod::toeplitz;
    out.value = toeplitz_mgf(f, t, e.n);
  } else {
    out.method = MgfMethod::fredholm;
    out.value = fredholm_mgf(e, f, t);
  }
  return out;
}

MgfCumulants cumulants_from_log_mgf(const std::function<long double(double)>& log_mgf, int ell_max, double h) {
  if (ell_max < 1 || ell_max > 4) throw ValidationError("cumulants_from_mgf supports 1 <= lmax <= 4");
  if (!(h > 0)) throw ValidationError("step must be positive");
  const long double l0 = log_mgf(0.0);
  if (std::abs(l0) > 1e-12L)
    throw ValidationError("mgf(0) differs from 1 by " + std::to_string(static_cast<double>(l0)));

  MgfCumulants out;
  out.h = h;
  out.values = interpolated_cumulants(log_mgf, ell_max, h);
  out.refined = interpolated_cumulants(log_mgf, ell_max, h / 2);
  for (int p = 1; p <= ell_max; ++p) {
    const double a = out.values[p - 1], b = out.refined[p - 1];
    // the interpolation error of coefficient p is O(h^q), q even
    const int q = 2 * ell_max + 2 - p - (p % 2 == 1 ? 1 : 0);
    const double r = std::ldexp(1.0, q);
    out.extrapolated.push_back((r * b - a) / (r - 1));
    const double diff = std::abs(a - b);
    if (diff > 1e-6 * std::max(std::abs(a), std::abs(b)) && diff > 1e-8) out.flagged = true;
  }
  return out;
}

MgfCumulants cumulants_from_mgf(const std::function<double(double)>& mgf, int ell_max, double h) {
  return cumulants_from_log_mgf(
      [&](double t) {
        const double m = mgf(t);
        if (!(m > 0)) throw NumericalError("mgf is not positive at t = " + std::to_string(t), m);
        return std::log(static_cast<long double>(m));
      },
      ell_max, h);
}

long double log_toeplitz_mgf(const FourierPoly& f, double t, int n) {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (!f.real_valued()) throw ValidationError("toeplitz_mgf needs a real-valued symbol");
  using LComplex = std::complex<long double>;
  const auto c = exp_symbol_coeffs_in<long double, LComplex>(f, t, n - 1);
  const LComplex det = toeplitz_det_generic<long double>(c, n);
  if (std::abs(det.imag()) > 1e-12L * std::abs(det))
    throw NumericalError("toeplitz determinant has a non-negligible imaginary part",
                         static_cast<double>(std::abs(det.imag())));
  if (!(det.real() > 0)) throw NumericalError("toeplitz determinant is not positive", static_cast<double>(det.real()));
  return std::log(det.real());
}

double log_toeplitz_extended(const FourierPoly& f, double t, int n) {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (!f.real_valued()) throw ValidationError("szego needs a real-valued symbol");
  const auto c = exp_symbol_coeffs_in<HighReal, HighComplex>(f, t, n - 1);
  const HighComplex det = toeplitz_det_generic<HighReal>(c, n);
  return static_cast<double>(log(det.real()));
}

double szego_prediction(const FourierPoly& f, double t, int n) {
  return static_cast<double>(szego_prediction_high(f, t, n));
}

double szego_residual(const FourierPoly& f, double t, int n) {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (!f.real_valued()) throw ValidationError("szego needs a real-valued symbol");
  // constant symbol: diagonal Toeplitz matrix, log det = t n c exactly
  if (f.degree() == 0 || t == 0) return 0.0;
  const auto c = exp_symbol_coeffs_in<HighReal, HighComplex>(f, t, n - 1);
  const HighComplex det = toeplitz_det_generic<HighReal>(c, n);
  if (!(det.real() > 0)) throw NumericalError("Toeplitz determinant is not positive", static_cast<double>(det.real()));
  return static_cast<double>(log(det.real()) - szego_prediction_high(f, t, n));
}

}  // namespace lstat
