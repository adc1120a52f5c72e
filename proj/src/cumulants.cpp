#include "lstat/cumulants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lstat/combinatorics.hpp"
#include "lstat/errors.hpp"

namespace lstat {

namespace {

void check_common(const FourierPoly& f, int ell, const EngineCaps& caps) {
  if (!f.real_valued()) throw ValidationError("cumulants need a real-valued test function");
  if (ell < 1) throw ValidationError("cumulant order must be >= 1");
  if (ell > caps.max_ell)
    throw ResourceError("cumulant order " + std::to_string(ell) + " exceeds cap " + std::to_string(caps.max_ell));
}

struct CompositionTable {
  std::vector<std::vector<long long>> cut_positions;  // 1-based prefix lengths
  std::vector<Rational> weights;
  std::vector<Composition> comps;
};

CompositionTable composition_table(int ell) {
  CompositionTable t;
  t.comps = compositions(ell);
  for (const auto& c : t.comps) {
    std::vector<long long> cuts;
    for (int p : c.cuts()) cuts.push_back(p);
    t.cut_positions.push_back(std::move(cuts));
    t.weights.push_back(composition_weight(c));
  }
  return t;
}

// Composition-weighted clamp count for one tuple.
Rational tuple_weight(const CompositionTable& table, const std::vector<long long>& prefix, long long n) {
  Rational w = 0;
  std::vector<long long> sums;
  for (std::size_t c = 0; c < table.comps.size(); ++c) {
    sums.clear();
    for (long long p : table.cut_positions[c]) sums.push_back(prefix[p - 1]);
    long long cnt = clamp_count(n, sums);
    if (cnt != 0) w += table.weights[c] * Rational(static_cast<long>(cnt));
  }
  return w;
}

template <class Scalar, class Coeffs, class Visit>
void zero_sum_tuples(const Coeffs& coeffs, int ell, int deg, std::vector<int>& ks, std::vector<long long>& prefix,
                     Visit&& visit) {
  const int pos = static_cast<int>(ks.size());
  const long long run = pos ? prefix[pos - 1] : 0;
  if (pos == ell) {
    if (run == 0) visit(ks, prefix);
    return;
  }
  const long long remaining = ell - pos;
  for (const auto& kv : coeffs) {
    const long long next = run + kv.first;
    if (std::llabs(next) > (remaining - 1) * deg) continue;
    ks.push_back(kv.first);
    prefix[pos] = next;
    zero_sum_tuples<Scalar>(coeffs, ell, deg, ks, prefix, visit);
    ks.pop_back();
  }
}

std::complex<double> hat(const FourierPoly& h, int k) { return h.coeff(k); }

}  // namespace

CumulantValue cumulant_direct_unitary(const FourierPoly& f, int n, int ell, const EngineCaps& caps) {
  check_common(f, ell, caps);
  if (n < 1) throw ValidationError("n must be >= 1");
  if (static_cast<long long>(f.degree()) * ell > caps.max_degree_times_ell)
    throw ResourceError("degree * order exceeds the direct-path cap " + std::to_string(caps.max_degree_times_ell));

  const CompositionTable table = composition_table(ell);
  std::vector<int> ks;
  std::vector<long long> prefix(ell);
  CumulantValue out;

  if (f.is_exact()) {
    const auto& coeffs = f.exact_coeffs();
    ComplexRational total;
    zero_sum_tuples<ComplexRational>(coeffs, ell, f.degree(), ks, prefix,
                                     [&](const std::vector<int>& k, const std::vector<long long>& pre) {
                                       Rational w = tuple_weight(table, pre, n);
                                       if (sgn(w) == 0) return;
                                       ComplexRational prod(w);
                                       for (int ki : k) prod *= coeffs.at(ki);
                                       total += prod;
                                     });
    if (sgn(total.im) != 0) throw NumericalError("exact cumulant has an imaginary part", total.im.get_d());
    out.exact = total.re;
    out.value = total.re.get_d();
    return out;
  }

  const auto& coeffs = f.coeffs();
  std::complex<double> total = 0;
  zero_sum_tuples<std::complex<double>>(coeffs, ell, f.degree(), ks, prefix,
                                        [&](const std::vector<int>& k, const std::vector<long long>& pre) {
                                          Rational w = tuple_weight(table, pre, n);
                                          if (sgn(w) == 0) return;
                                          std::complex<double> prod = w.get_d();
                                          for (int ki : k) prod *= coeffs.at(ki);
                                          total += prod;
                                        });
  out.value = total.real();
  return out;
}

DenseMatrix<std::complex<double>> kernel_matrix(const ProjectionBasis& basis, const FourierPoly& h) {
  if (!h.real_valued()) throw ValidationError("kernel_matrix needs a real-valued multiplier");
  const Ensemble& e = basis.ensemble();
  if (!e.is_unitary() && !h.even()) throw ValidationError("odd multiplier for a non-unitary ensemble");
  const int n = basis.size();
  DenseMatrix<std::complex<double>> m(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      switch (e.kind) {
        case EnsembleKind::unitary: m(j, k) = hat(h, k - j); break;
        case EnsembleKind::symplectic: m(j, k) = hat(h, j - k) - hat(h, j + k + 2); break;
        case EnsembleKind::so_odd: m(j, k) = hat(h, j - k) - hat(h, j + k + 1); break;
        case EnsembleKind::so_even:
          if (j == 0 && k == 0)
            m(j, k) = hat(h, 0);
          else if (j == 0 || k == 0)
            m(j, k) = std::sqrt(2.0) * hat(h, j + k);
          else
            m(j, k) = hat(h, j - k) + hat(h, j + k);
          break;
      }
    }
  return m;
}

double cumulant_trace(const Ensemble& e, const FourierPoly& f, int ell, const EngineCaps& caps) {
  check_common(f, ell, caps);
  if (e.n > caps.max_n) throw ResourceError("rank " + std::to_string(e.n) + " exceeds cap " + std::to_string(caps.max_n));
  if (f.degree() > caps.max_degree)
    throw ResourceError("degree " + std::to_string(f.degree()) + " exceeds cap " + std::to_string(caps.max_degree));
  if (!e.is_unitary() && !f.even()) throw ValidationError("odd test function for a non-unitary ensemble");

  const ProjectionBasis basis(e);
  std::vector<DenseMatrix<std::complex<double>>> powers;
  for (int p = 1; p <= ell; ++p) powers.push_back(kernel_matrix(basis, convolve_power(f, p)));

  std::complex<double> total = 0;
  for (const auto& c : compositions(ell)) {
    DenseMatrix<std::complex<double>> prod = powers[c.parts[0] - 1];
    for (int i = 1; i < c.size(); ++i) prod = prod * powers[c.parts[i] - 1];
    total += composition_weight(c).get_d() * prod.trace();
  }
  return total.real();
}

double mean_shift(const Ensemble& e, const FourierPoly& f) {
  double s = 0;
  for (const auto& [k, c] : f.coeffs()) {
    if (k < 1) continue;
    const bool even_k = k % 2 == 0;
    switch (e.kind) {
      case EnsembleKind::unitary: break;
      case EnsembleKind::so_even: s += even_k ? c.real() : 0.0; break;
      case EnsembleKind::so_odd: s -= even_k ? 0.0 : c.real(); break;
      case EnsembleKind::symplectic: s -= even_k ? c.real() : 0.0; break;
    }
  }
  return s;
}

double limit_cumulant(const Ensemble& e, const FourierPoly& f, int ell) {
  if (ell < 1) throw ValidationError("cumulant order must be >= 1");
  if (!e.is_unitary() && !f.even()) throw ValidationError("odd test function for a non-unitary ensemble");
  if (ell == 1) return e.n * f.coeff(0).real() + mean_shift(e, f);
  if (ell >= 3) return 0.0;
  double s = 0;
  for (const auto& [k, c] : f.coeffs()) {
    if (e.is_unitary())
      s += std::abs(k) * std::norm(c);
    else if (k >= 1)
      s += k * c.real() * c.real();
  }
  return s;
}

FourierPoly local_statistic_poly(const Ensemble& e, const LocalTestFunction& g, double L, double theta0) {
  if (!e.is_unitary() && !(theta0 > 0 && theta0 < std::numbers::pi))
    throw ValidationError("theta0 must lie strictly between 0 and pi for " + e.label());
  const int band = e.n + effective_support(g, L);
  FourierPoly h = localize(g, L, theta0, band);
  if (e.is_unitary()) return h;
  return symmetrize_even(h);
}

double local_cumulant(const Ensemble& e, const LocalTestFunction& g, double L, double theta0, int ell,
                      const EngineCaps& caps) {
  return cumulant_trace(e, local_statistic_poly(e, g, L, theta0), ell, caps);
}

double CumulantReport::max_abs_discrepancy() const {
  std::vector<double> vals{value_trace};
  if (value_direct) vals.push_back(*value_direct);
  if (value_mgf) vals.push_back(*value_mgf);
  double worst = 0;
  for (std::size_t i = 0; i < vals.size(); ++i)
    for (std::size_t j = i + 1; j < vals.size(); ++j) worst = std::max(worst, std::abs(vals[i] - vals[j]));
  return worst;
}

nlohmann::json to_json(const CumulantReport& r) {
  nlohmann::json j;
  j["ensemble"] = r.ensemble.name();
  j["n"] = r.ensemble.n;
  j["ell"] = r.ell;
  j["f"] = nlohmann::json::parse(r.f);
  j["value_direct"] = r.value_direct ? nlohmann::json(*r.value_direct) : nlohmann::json(nullptr);
  j["value_trace"] = r.value_trace;
  j["value_mgf"] = r.value_mgf ? nlohmann::json(*r.value_mgf) : nlohmann::json(nullptr);
  j["value_limit"] = r.value_limit;
  j["max_abs_discrepancy"] = r.max_abs_discrepancy();
  return j;
}

}  // namespace lstat
