#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lstat/linalg.hpp"

namespace lstat {

enum class EnsembleKind { unitary, so_even, so_odd, symplectic };

// U(n), SO(2n), SO(2n+1) or Sp(n). `n` is the number of free angles.
struct Ensemble {
  EnsembleKind kind = EnsembleKind::unitary;
  int n = 1;

  Ensemble() = default;
  Ensemble(EnsembleKind k, int rank);

  // "u", "so-even", "so-odd", "sp"
  static Ensemble parse(const std::string& name, int rank);
  std::string name() const;
  // "U(8)", "SO(16)", "SO(17)", "Sp(8)"
  std::string label() const;

  bool is_unitary() const { return kind == EnsembleKind::unitary; }
  double domain_lo() const;
  double domain_hi() const;
};

// Orthonormal family whose projection kernel generates the eigenvalue process.
//   unitary   e^{ijx} / sqrt(2 pi),           j = 0..n-1, on [-pi, pi)
//   so_even   1/sqrt(pi), sqrt(2/pi) cos(jx), j = 1..n-1, on [0, pi]
//   so_odd    sqrt(2/pi) sin((j + 1/2) x),    j = 0..n-1, on [0, pi]
//   symplectic sqrt(2/pi) sin(jx),            j = 1..n,   on [0, pi]
class ProjectionBasis {
 public:
  explicit ProjectionBasis(Ensemble e) : ens_(e) {}

  const Ensemble& ensemble() const { return ens_; }
  int size() const { return ens_.n; }

  // Frequency label of basis element idx (0-based index).
  double frequency(int idx) const;
  std::complex<double> phi(int idx, double x) const;
  void eval(double x, std::span<std::complex<double>> out) const;

  std::complex<double> kernel(double x, double y) const;
  double diagonal(double x) const;
  // \int_a^b K(x, x) dx
  double diagonal_mass(double a, double b) const;
  // Upper bound on sup K(x, x).
  double diagonal_bound() const;
  // Upper bound on sup |phi_idx|^2 summed over all idx, and the largest
  // frequency present; used to bound derivatives of K_i(x, x).
  double phi_square_sum_bound() const;
  double max_frequency() const;

 private:
  Ensemble ens_;
};

// Kernels in the form they are usually written down, for cross-checks:
// Q_n for unitary, K(x,y) +/- K(x,-y) built from the Dirichlet-type kernel
// K_N(x, y) = (1/2pi) sum_{|j| <= N/2} e^{ij(x-y)} otherwise.
double kernel_closed_form(const Ensemble& e, double x, double y);

// Joint density of the n angles (unordered) on domain^n.
double weyl_density(const Ensemble& e, std::span<const double> angles);

// M[j,k] = \int phi_j(x) w(x) conj(phi_k(x)) dx by trapezoid quadrature with
// `intervals` subintervals (periodic for unitary, endpoint-halved otherwise).
DenseMatrix<std::complex<double>> multiplier_matrix(const ProjectionBasis& basis,
                                                    const std::function<double(double)>& w,
                                                    int intervals);

}  // namespace lstat
