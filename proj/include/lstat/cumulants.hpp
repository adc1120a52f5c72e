#pragma once

#include <complex>
#include <optional>
#include <string>

#include "json.hpp"
#include "lstat/ensemble.hpp"
#include "lstat/fourier.hpp"
#include "lstat/linalg.hpp"
#include "lstat/rational.hpp"

namespace lstat {

struct EngineCaps {
  int max_ell = 4;
  int max_n = 128;
  int max_degree = 8;
  int max_degree_times_ell = 64;
};

struct CumulantValue {
  double value = 0;
  std::optional<Rational> exact;  // set when f carried exact coefficients
};

// Fourier k-sum for U(n): sum over zero-sum tuples of prod f^(k_i) times the
// composition-weighted clamp counts.
CumulantValue cumulant_direct_unitary(const FourierPoly& f, int n, int ell, const EngineCaps& caps = {});

// M[j,k] = \int phi_j h conj(phi_k), from the closed forms in h's Fourier
// coefficients. Non-unitary ensembles need an even h.
DenseMatrix<std::complex<double>> kernel_matrix(const ProjectionBasis& basis, const FourierPoly& h);

// sum over compositions of weight * tr(prod_i M(f^{l_i})). Valid for all four
// ensembles.
double cumulant_trace(const Ensemble& e, const FourierPoly& f, int ell, const EngineCaps& caps = {});

// n -> infinity value: l = 1 gives n f^(0) plus the ensemble shift, l = 2 the
// Szego-type variance, l >= 3 zero.
double limit_cumulant(const Ensemble& e, const FourierPoly& f, int ell);
// The n-independent part of limit_cumulant at l = 1.
double mean_shift(const Ensemble& e, const FourierPoly& f);

// Circle function whose linear statistic is sum_j g(L (theta_j - theta0)),
// periodized. For SO/Sp this is the even symmetrization on [0, pi].
FourierPoly local_statistic_poly(const Ensemble& e, const LocalTestFunction& g, double L, double theta0);

double local_cumulant(const Ensemble& e, const LocalTestFunction& g, double L, double theta0, int ell,
                      const EngineCaps& caps = {});

struct CumulantReport {
  Ensemble ensemble;
  std::string f;
  int ell = 1;
  std::optional<double> value_direct;
  double value_trace = 0;
  std::optional<double> value_mgf;
  double value_limit = 0;
  // over the finite-n paths (direct, trace, mgf)
  double max_abs_discrepancy() const;
};

nlohmann::json to_json(const CumulantReport& r);

}  // namespace lstat
