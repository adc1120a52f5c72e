#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lstat/ensemble.hpp"
#include "lstat/fourier.hpp"

namespace lstat {

enum class MgfMethod { toeplitz, fredholm, weyl_quadrature };
std::string method_name(MgfMethod m);

struct MgfEvaluation {
  Ensemble ensemble;
  std::string f;
  double t = 0;
  double value = 1;
  MgfMethod method = MgfMethod::toeplitz;
};

// D_{n-1}(e^{tf}): n x n Toeplitz determinant of the symbol coefficients.
double toeplitz_mgf(const FourierPoly& f, double t, int n);

// det(I + M), M[j,k] = \int phi_j (e^{tf} - 1) conj(phi_k) on the ensemble domain.
double fredholm_mgf(const Ensemble& e, const FourierPoly& f, double t);

// E exp(t sum_i f(theta_i)) integrated directly against the Weyl density on a
// tensor trapezoid grid. n <= 3.
double weyl_quadrature_mgf(const Ensemble& e, const FourierPoly& f, double t, int points_per_axis = 256);
// \int density over domain^n on the same grid; 1 when the density is normalized.
double weyl_normalization(const Ensemble& e, int points_per_axis = 256);

// Determinant MGF appropriate to the ensemble: Toeplitz for unitary,
// Fredholm otherwise.
MgfEvaluation evaluate_mgf(const Ensemble& e, const FourierPoly& f, double t);

struct MgfCumulants {
  std::vector<double> values;        // kappa_1..kappa_lmax at step h
  std::vector<double> refined;       // same at step h/2
  std::vector<double> extrapolated;  // Richardson combination of the two
  bool flagged = false;              // the two steps disagree
  double h = 0.05;
};

// Cumulants from log mgf sampled at t = j h, j = -lmax..lmax, by exact
// polynomial interpolation; repeated at h/2 as a consistency check.
MgfCumulants cumulants_from_mgf(const std::function<double(double)>& mgf, int ell_max, double h = 0.05);
// Same, from log mgf directly (avoids rounding the mgf to double first).
MgfCumulants cumulants_from_log_mgf(const std::function<long double(double)>& log_mgf, int ell_max,
                                   double h = 0.05);

// log D_{n-1}(e^{tf}) with the symbol and the LU carried out in long double.
long double log_toeplitz_mgf(const FourierPoly& f, double t, int n);

// log D_{n-1}(e^{tf}) evaluated in extended precision.
double log_toeplitz_extended(const FourierPoly& f, double t, int n);
// t n f^(0) + t^2/2 sum |k| |f^(k)|^2
double szego_prediction(const FourierPoly& f, double t, int n);
// log D_{n-1}(e^{tf}) - szego_prediction, both in extended precision.
double szego_residual(const FourierPoly& f, double t, int n);

}  // namespace lstat
