#include "lstat/ensemble.hpp"

#include <cmath>
#include <numbers>

#include "lstat/errors.hpp"

namespace lstat {

namespace {

constexpr double pi = std::numbers::pi;

// sin(N a) / sin(a), continued through the removable singularities.
double dirichlet_ratio(double N, double a) {
  const double s = std::sin(a);
  if (std::abs(s) > 1e-9) return std::sin(N * a) / s;
  return N * std::cos(N * a) / std::cos(a);
}

}  // namespace

Ensemble::Ensemble(EnsembleKind k, int rank) : kind(k), n(rank) {
  if (rank < 1) throw ValidationError("ensemble rank must be >= 1");
}

Ensemble Ensemble::parse(const std::string& name, int rank) {
  if (name == "u" || name == "unitary") return {EnsembleKind::unitary, rank};
  if (name == "so-even") return {EnsembleKind::so_even, rank};
  if (name == "so-odd") return {EnsembleKind::so_odd, rank};
  if (name == "sp") return {EnsembleKind::symplectic, rank};
  throw ValidationError("unknown ensemble '" + name + "' (expected u, so-even, so-odd, sp)");
}

std::string Ensemble::name() const {
  switch (kind) {
    case EnsembleKind::unitary: return "u";
    case EnsembleKind::so_even: return "so-even";
    case EnsembleKind::so_odd: return "so-odd";
    case EnsembleKind::symplectic: return "sp";
  }
  return "?";
}

std::string Ensemble::label() const {
  switch (kind) {
    case EnsembleKind::unitary: return "U(" + std::to_string(n) + ")";
    case EnsembleKind::so_even: return "SO(" + std::to_string(2 * n) + ")";
    case EnsembleKind::so_odd: return "SO(" + std::to_string(2 * n + 1) + ")";
    case EnsembleKind::symplectic: return "Sp(" + std::to_string(n) + ")";
  }
  return "?";
}

double Ensemble::domain_lo() const { return is_unitary() ? -pi : 0.0; }
double Ensemble::domain_hi() const { return pi; }

double ProjectionBasis::frequency(int idx) const {
  switch (ens_.kind) {
    case EnsembleKind::unitary:
    case EnsembleKind::so_even: return idx;
    case EnsembleKind::so_odd: return idx + 0.5;
    case EnsembleKind::symplectic: return idx + 1;
  }
  return 0;
}

std::complex<double> ProjectionBasis::phi(int idx, double x) const {
  const double w = frequency(idx);
  switch (ens_.kind) {
    case EnsembleKind::unitary: return std::polar(1.0 / std::sqrt(2 * pi), w * x);
    case EnsembleKind::so_even:
      if (idx == 0) return 1.0 / std::sqrt(pi);
      return std::sqrt(2 / pi) * std::cos(w * x);
    case EnsembleKind::so_odd:
    case EnsembleKind::symplectic: return std::sqrt(2 / pi) * std::sin(w * x);
  }
  return 0;
}

void ProjectionBasis::eval(double x, std::span<std::complex<double>> out) const {
  for (int j = 0; j < size(); ++j) out[j] = phi(j, x);
}

std::complex<double> ProjectionBasis::kernel(double x, double y) const {
  std::complex<double> s = 0;
  for (int j = 0; j < size(); ++j) s += phi(j, x) * std::conj(phi(j, y));
  return s;
}

double ProjectionBasis::diagonal(double x) const {
  const int n = size();
  double s = 0;
  switch (ens_.kind) {
    case EnsembleKind::unitary: return n / (2 * pi);
    case EnsembleKind::so_even:
      for (int j = 1; j < n; ++j) s += std::cos(2.0 * j * x);
      return (n + s) / pi;
    case EnsembleKind::so_odd:
      for (int j = 0; j < n; ++j) s += std::cos((2.0 * j + 1) * x);
      return (n - s) / pi;
    case EnsembleKind::symplectic:
      for (int j = 1; j <= n; ++j) s += std::cos(2.0 * j * x);
      return (n - s) / pi;
  }
  return 0;
}

double ProjectionBasis::diagonal_mass(double a, double b) const {
  const int n = size();
  double s = 0;
  switch (ens_.kind) {
    case EnsembleKind::unitary: return n * (b - a) / (2 * pi);
    case EnsembleKind::so_even:
      for (int j = 1; j < n; ++j) s += (std::sin(2.0 * j * b) - std::sin(2.0 * j * a)) / (2.0 * j);
      return (n * (b - a) + s) / pi;
    case EnsembleKind::so_odd:
      for (int j = 0; j < n; ++j) {
        const double w = 2.0 * j + 1;
        s += (std::sin(w * b) - std::sin(w * a)) / w;
      }
      return (n * (b - a) - s) / pi;
    case EnsembleKind::symplectic:
      for (int j = 1; j <= n; ++j) s += (std::sin(2.0 * j * b) - std::sin(2.0 * j * a)) / (2.0 * j);
      return (n * (b - a) - s) / pi;
  }
  return 0;
}

double ProjectionBasis::diagonal_bound() const {
  if (ens_.is_unitary()) return size() / (2 * pi);
  return 2.0 * size() / pi;
}

double ProjectionBasis::phi_square_sum_bound() const { return diagonal_bound(); }

double ProjectionBasis::max_frequency() const { return frequency(size() - 1); }

double kernel_closed_form(const Ensemble& e, double x, double y) {
  const int n = e.n;
  const double c = 1 / (2 * pi);
  switch (e.kind) {
    case EnsembleKind::unitary: {
      // |Q_n(x, y)| = |K_n(x, y)|; the phase e^{i(n-1)(x-y)/2} is dropped.
      return c * dirichlet_ratio(n, (x - y) / 2);
    }
    case EnsembleKind::so_even: {
      const double N = 2.0 * n - 1;
      return c * (dirichlet_ratio(N, (x - y) / 2) + dirichlet_ratio(N, (x + y) / 2));
    }
    case EnsembleKind::so_odd: {
      const double N = 2.0 * n;
      return c * (dirichlet_ratio(N, (x - y) / 2) - dirichlet_ratio(N, (x + y) / 2));
    }
    case EnsembleKind::symplectic: {
      const double N = 2.0 * n + 1;
      return c * (dirichlet_ratio(N, (x - y) / 2) - dirichlet_ratio(N, (x + y) / 2));
    }
  }
  return 0;
}

double weyl_density(const Ensemble& e, std::span<const double> angles) {
  const int n = static_cast<int>(angles.size());
  if (n != e.n) throw ValidationError("weyl_density: expected " + std::to_string(e.n) + " angles");
  double nfact = 1;
  for (int i = 2; i <= n; ++i) nfact *= i;

  double vandermonde = 1;
  if (e.is_unitary()) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) vandermonde *= 2 - 2 * std::cos(angles[i] - angles[j]);
    return vandermonde / (std::pow(2 * pi, n) * nfact);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = 2 * std::cos(angles[i]) - 2 * std::cos(angles[j]);
      vandermonde *= d * d;
    }
  double single = 1;
  switch (e.kind) {
    case EnsembleKind::so_even: return 2 * vandermonde / (std::pow(2 * pi, n) * nfact);
    case EnsembleKind::so_odd:
      for (double a : angles) single *= std::pow(std::sin(a / 2), 2);
      return std::pow(2 / pi, n) * single * vandermonde / nfact;
    case EnsembleKind::symplectic:
      for (double a : angles) single *= std::pow(std::sin(a), 2);
      return std::pow(2 / pi, n) * single * vandermonde / nfact;
    default: break;
  }
  return 0;
}

DenseMatrix<std::complex<double>> multiplier_matrix(const ProjectionBasis& basis,
                                                    const std::function<double(double)>& w,
                                                    int intervals) {
  if (intervals < 2) throw ValidationError("multiplier_matrix: need at least 2 intervals");
  const int n = basis.size();
  const Ensemble& e = basis.ensemble();
  const double lo = e.domain_lo(), hi = e.domain_hi();
  const double h = (hi - lo) / intervals;
  const int nodes = e.is_unitary() ? intervals : intervals + 1;

  DenseMatrix<std::complex<double>> m(n, n);
  std::vector<std::complex<double>> phi(n);
  for (int q = 0; q < nodes; ++q) {
    const double x = lo + q * h;
    double weight = h * w(x);
    if (!e.is_unitary() && (q == 0 || q == intervals)) weight *= 0.5;
    if (weight == 0) continue;
    basis.eval(x, phi);
    for (int j = 0; j < n; ++j) {
      const std::complex<double> a = weight * phi[j];
      for (int k = 0; k < n; ++k) m(j, k) += a * std::conj(phi[k]);
    }
  }
  return m;
}

}  // namespace lstat
