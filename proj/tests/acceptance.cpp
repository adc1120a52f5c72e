// Acceptance suite: one PASS/FAIL line per criterion, details indented below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "lstat/combinatorics.hpp"
#include "lstat/cumulants.hpp"
#include "lstat/determinants.hpp"
#include "lstat/errors.hpp"
#include "lstat/harness.hpp"
#include "lstat/sampler.hpp"

using namespace lstat;

namespace {

constexpr double pi = std::numbers::pi;
constexpr std::uint64_t kSeed = 20260101;
const EnsembleKind kinds[] = {EnsembleKind::unitary, EnsembleKind::so_even, EnsembleKind::so_odd,
                              EnsembleKind::symplectic};

struct Outcome {
  bool pass = true;
  std::vector<std::string> lines;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok    " : "FAIL  ") + what);
  }
  void note(const std::string& what) { lines.push_back("info  " + what); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FourierPoly f_cos() { return make_poly(std::vector<std::pair<int, ComplexRational>>{{1, {1}}, {-1, {1}}}); }
FourierPoly f_mixed() {
  return make_poly(std::vector<std::pair<int, ComplexRational>>{
      {1, {1}}, {-1, {1}}, {2, {Rational(1, 2)}}, {-2, {Rational(1, 2)}}});
}

// Integer vector with entries in [-20, 20]; zero-sum vectors by rejection on
// the last entry.
std::vector<Rational> draw(RandomStream& rng, int len, bool zero_sum) {
  auto uni = [&] { return static_cast<long>(rng.bits() % 41) - 20; };
  for (;;) {
    std::vector<Rational> k;
    long s = 0;
    for (int i = 0; i < len - (zero_sum ? 1 : 0); ++i) {
      const long v = uni();
      s += v;
      k.emplace_back(v);
    }
    if (!zero_sum) return k;
    if (std::labs(s) > 20) continue;
    k.emplace_back(-s);
    return k;
  }
}

std::vector<Rational> neg(const std::vector<Rational>& k) {
  std::vector<Rational> out;
  for (const auto& x : k) out.emplace_back(-x);
  return out;
}

std::string vec(const std::vector<Rational>& k) {
  std::string s = "(";
  for (std::size_t i = 0; i < k.size(); ++i) s += (i ? "," : "") + k[i].get_str();
  return s + ")";
}

// ------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const int trials = 200;
  RandomStream rng(kSeed, 1);

  {
    int bad = 0, sym_bad = 0;
    std::string first;
    for (int i = 0; i < trials; ++i) {
      auto k = draw(rng, 2, true);
      const Rational g = g_direct(k);
      if (g != abs(k[0])) {
        if (!bad++) first = vec(k) + " -> G = " + g.get_str();
      }
      if (g + g_direct(neg(k)) != abs(k[0])) ++sym_bad;
    }
    o.check(bad == 0, fmt("l=2: G(k1,k2) = |k1| as stated; %d/%d vectors differ, e.g. %s", bad, trials, first.c_str()));
    o.note(fmt("l=2: G(k1,k2) + G(-k1,-k2) = |k1| holds on %d/%d vectors (the form the variance uses)",
               trials - sym_bad, trials));
  }
  for (int ell = 3; ell <= 6; ++ell) {
    int bad = 0;
    for (int i = 0; i < trials; ++i) bad += g_direct(draw(rng, ell, true)) != 0;
    o.check(bad == 0, fmt("l=%d: G = 0 on %d vectors (%d failures)", ell, trials, bad));
  }
  for (int ell = 2; ell <= 6; ++ell) {
    int bad = 0;
    for (int i = 0; i < trials; ++i) {
      auto k = draw(rng, ell, true);
      bad += g_direct(k) != g_subset_form(k);
    }
    o.check(bad == 0, fmt("l=%d: g_direct = g_subset_form on %d vectors (%d failures)", ell, trials, bad));
  }
  for (int m = 2; m <= 7; ++m) {
    int bad = 0;
    for (int i = 0; i < trials; ++i) {
      auto [l, r] = rs_identity_sides(draw(rng, m, true));
      bad += l != r;
    }
    o.check(bad == 0, fmt("m=%d: Rudnick-Sarnak LHS = RHS on %d vectors (%d failures)", m, trials, bad));
  }
  for (int ell = 2; ell <= 5; ++ell) {
    int bad = 0;
    for (int i = 0; i < trials; ++i) bad += u_tree_sum(draw(rng, ell, false)) != 0;
    o.check(bad == 0, fmt("l=%d: U = 0 on %d vectors (%d failures)", ell, trials, bad));
  }
  for (int ell = 1; ell <= 4; ++ell) {
    int bad = 0;
    for (int i = 0; i < trials; ++i) {
      auto k = draw(rng, ell, false);
      Rational s = 0;
      for (const auto& x : k) s += x;
      auto ext = k;
      ext.emplace_back(-s);
      bad += u_tree_sum(k) + u_tree_sum(neg(k)) != g_direct(ext) + g_direct(neg(ext));
    }
    o.check(bad == 0, fmt("l=%d: U(k) + U(-k) = G(k,k') + G(-k,-k') on %d vectors (%d failures)", ell, trials, bad));
  }
  {
    bool ok = comp_coeff_sum(1) == 1;
    for (int ell = 2; ell <= 12; ++ell) ok = ok && comp_coeff_sum(ell) == 0;
    o.check(ok, "coefficient sum is 1 at l=1 and 0 for l=2..12");
  }
  const double secs = seconds_since(t0);
  o.check(secs < 60, fmt("runtime %.2f s (budget 60 s)", secs));
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  double worst_rel = 0, worst_abs = 0;
  int rows = 0, bad = 0, nonzero_exact = 0, flagged = 0;
  const std::pair<const char*, FourierPoly> fs[] = {{"2cos", f_cos()}, {"2cos+cos2", f_mixed()}};
  for (const auto& [name, f] : fs)
    for (int n : {2, 4, 8, 16, 32}) {
      auto mgf = cumulants_from_log_mgf([&](double t) { return log_toeplitz_mgf(f, t, n); }, 4);
      flagged += mgf.flagged;
      for (int ell = 1; ell <= 4; ++ell) {
        const auto d = cumulant_direct_unitary(f, n, ell);
        const double tr = cumulant_trace(Ensemble(EnsembleKind::unitary, n), f, ell);
        const double mg = mgf.extrapolated[ell - 1];
        const double v[3] = {d.value, tr, mg};
        for (int i = 0; i < 3; ++i)
          for (int j = i + 1; j < 3; ++j) {
            const double diff = std::abs(v[i] - v[j]);
            const double scale = std::max(std::abs(v[i]), std::abs(v[j]));
            const bool ok = diff <= 1e-8 || diff <= 1e-6 * scale;
            if (!ok) {
              ++bad;
              o.note(fmt("%s n=%d l=%d: direct %.12g trace %.12g mgf %.12g", name, n, ell, v[0], v[1], v[2]));
            }
            worst_abs = std::max(worst_abs, diff);
            if (scale > 1e-8) worst_rel = std::max(worst_rel, diff / scale);
          }
        if (ell >= 3 && n >= ell * f.degree()) nonzero_exact += !(d.exact && *d.exact == 0);
        ++rows;
      }
    }
  o.check(bad == 0, fmt("%d (f, n, l) rows: direct/trace/mgf agree to 1e-6 rel or 1e-8 abs; worst abs %.2e, "
                        "worst rel on nonzero values %.2e",
                        rows, worst_abs, worst_rel));
  o.check(nonzero_exact == 0, fmt("exact path: l=3,4 values with n >= l*degree are exactly 0 (%d exceptions)",
                                  nonzero_exact));
  o.note(fmt("mgf step-halving disagreement flags raised: %d of 10 (values above are the extrapolated ones)",
             flagged));
  const double secs = seconds_since(t0);
  o.check(secs < 300, fmt("runtime %.2f s (budget 300 s)", secs));
  return o;
}

Outcome criterion3() {
  Outcome o;
  double worst = 0;
  for (const auto& f : {f_cos(), f_mixed()})
    for (auto kind : kinds)
      for (int n = 1; n <= 3; ++n)
        for (double t : {0.1, 0.3}) {
          Ensemble e(kind, n);
          worst = std::max(worst, std::abs(weyl_quadrature_mgf(e, f, t) - evaluate_mgf(e, f, t).value));
        }
  o.check(worst <= 1e-7, fmt("Weyl quadrature vs determinant mgf, 4 ensembles, n<=3, t in {0.1,0.3}: max |diff| %.2e "
                             "(tol 1e-7)",
                             worst));
  double worst_rel = 0;
  for (const auto& f : {f_cos(), f_mixed()})
    for (int n = 1; n <= 32; ++n)
      for (double t : {-1.0, -0.3, 0.1, 0.3, 0.5, 1.0}) {
        const double a = toeplitz_mgf(f, t, n), b = fredholm_mgf(Ensemble(EnsembleKind::unitary, n), f, t);
        worst_rel = std::max(worst_rel, std::abs(a - b) / std::abs(a));
      }
  o.check(worst_rel <= 1e-9, fmt("Toeplitz vs Fredholm on U(n), n=1..32: max rel diff %.2e (tol 1e-9)", worst_rel));
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto f = f_cos();
  const double lg = std::log(toeplitz_mgf(f, 0.5, 16));
  o.check(std::abs(lg - 0.25) <= 1e-6, fmt("n=16: log D = %.17g, |log D - 0.25| = %.2e (tol 1e-6)", lg,
                                           std::abs(lg - 0.25)));
  bool mono = true;
  double prev = INFINITY;
  std::string seq;
  for (int n = 2; n <= 16; ++n) {
    const double r = szego_residual(f, 0.5, n);
    mono = mono && std::abs(r) < prev;
    prev = std::abs(r);
    if (n % 2 == 0 || n == 3) seq += fmt(" n=%d:%.2e", n, r);
  }
  o.check(mono, "|residual| strictly decreasing over n=2..16 (extended precision)");
  o.note("residuals" + seq);
  return o;
}

Outcome criterion5() {
  Outcome o;
  const auto f = f_mixed();  // f^(1) = 1, f^(2) = 1/2
  for (auto kind : {EnsembleKind::so_even, EnsembleKind::so_odd, EnsembleKind::symplectic}) {
    Ensemble e(kind, 64);
    const double shift = mean_shift(e, f);
    const double m64 = cumulant_trace(e, f, 1);
    o.check(std::abs(m64 - shift) <= 1e-3,
            fmt("%s: l=1 trace %.15g vs shift %.15g, gap %.2e (tol 1e-3)", e.label().c_str(), m64, shift,
                std::abs(m64 - shift)));
    double worst = 0;
    for (int n = 4; n <= 64; ++n)
      worst = std::max(worst, std::abs(cumulant_trace(Ensemble(kind, n), f, 2) - 1.5));
    o.check(worst <= 1e-6,
            fmt("%s family: l=2 trace vs sum k f(k)^2 = 1.5 for n=4..64, max gap %.2e (tol 1e-6)",
                Ensemble(kind, 1).name().c_str(), worst));
  }
  // the stated shift formulas, written out independently of mean_shift()
  const double so_even = 0.5 * ((1 - 1) * 1.0 + (1 + 1) * 0.5);
  const double so_odd = 0.5 * ((-1 - 1) * 1.0 + (-1 + 1) * 0.5);
  const double sp = -0.5 * ((1 - 1) * 1.0 + (1 + 1) * 0.5);
  o.check(mean_shift(Ensemble(EnsembleKind::so_even, 1), f) == so_even &&
              mean_shift(Ensemble(EnsembleKind::so_odd, 1), f) == so_odd &&
              mean_shift(Ensemble(EnsembleKind::symplectic, 1), f) == sp,
          fmt("shifts match the stated sums: SO(2n) %.3g, SO(2n+1) %.3g, Sp(n) %.3g", so_even, so_odd, sp));
  return o;
}

Outcome local_clt(EnsembleKind kind, double theta0, double budget) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Ensemble e(kind, 64);
  const auto g = LocalTestFunction::triangle();
  const auto r = run_local_clt(e, g, 8, theta0, 10000, kSeed);
  for (const auto& c : r.checks) {
    std::string line;
    if (c.name == "ks_vs_limit_normal")
      line = fmt("%s: %.4f vs critical %.4f", c.name.c_str(), c.value, c.allowed);
    else
      line = fmt("%s: %.6f vs %.6f, |diff| %.2e, allowed %.2e", c.name.c_str(), c.value, c.target,
                 std::abs(c.value - c.target), c.allowed);
    o.check(c.passed, line);
  }
  const auto s = empirical_cumulants(r.values, r.oracle_mean, r.limit_variance);
  o.note(fmt("%s, L=8, theta0=%.4f, N=%zu, failed samples %zu", e.label().c_str(), theta0, s.count,
             r.failed_samples));
  o.note(fmt("exact finite-n mean %.6f; stated target %.6f; MC mean %.6f +- %.6f", r.oracle_mean, r.mean_target,
             s.k[0], s.se[0]));
  o.note(fmt("MC variance %.6f +- %.6f; limit variance 1/(12 pi) = %.6f (%.1f SE away)", s.k[1], s.se[1],
             r.limit_variance, std::abs(s.k[1] - r.limit_variance) / s.se[1]));
  const double secs = seconds_since(t0);
  o.check(secs < budget, fmt("runtime %.1f s (budget %.0f s)", secs, budget));
  return o;
}

Outcome criterion8() {
  Outcome o;
  const int n = 8;
  const std::size_t samples = 12500;  // 10^5 pooled angles
  for (auto kind : kinds) {
    Ensemble e(kind, n);
    ProjectionBasis b(e);
    auto draws = sample_batch(e, kSeed, 0, samples);
    const int bins = 50;
    std::vector<long> counts(bins, 0);
    const double lo = e.domain_lo(), hi = e.domain_hi(), w = (hi - lo) / bins;
    for (const auto& d : draws)
      for (double a : d.angles) counts[std::min(bins - 1, static_cast<int>((a - lo) / w))]++;
    double worst = 0;
    int outside = 0;
    for (int i = 0; i < bins; ++i) {
      const double expect = samples * b.diagonal_mass(lo + i * w, lo + (i + 1) * w);
      const double z = (counts[i] - expect) / std::sqrt(expect);
      worst = std::max(worst, std::abs(z));
      outside += std::abs(z) > 4;
    }
    o.check(outside == 0, fmt("%s: 50-bin histogram of 10^5 angles vs K(x,x), max |z| = %.2f (%d bins beyond 4 sigma)",
                              e.label().c_str(), worst, outside));
    auto again = sample_batch(e, kSeed, 0, samples, 1);
    bool same = true;
    for (std::size_t i = 0; i < samples && same; ++i) same = again[i].angles == draws[i].angles;
    o.check(same, fmt("%s: fixed seed reproduces all %zu samples bit for bit (single thread vs pool)",
                      e.label().c_str(), samples));
  }
  return o;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* title;
    Outcome (*run)();
  };
  const Entry entries[] = {
      {1, "exact combinatorial identities", criterion1},
      {2, "cumulant cross-oracle (direct / trace / mgf)", criterion2},
      {3, "Heine-Andreief and Toeplitz-Fredholm consistency", criterion3},
      {4, "strong Szego asymptote", criterion4},
      {5, "SO/Sp mean shifts and variances", criterion5},
      {6, "local CLT for U(64)", [] { return local_clt(EnsembleKind::unitary, 0.0, 600); }},
      {7, "local CLT for SO(128) at theta0 = pi/2", [] { return local_clt(EnsembleKind::so_even, pi / 2, 600); }},
      {8, "sampler one-point density and reproducibility", criterion8},
  };
  int failed = 0;
  for (const auto& e : entries) {
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o.check(false, std::string("exception: ") + ex.what());
    }
    std::printf("criterion %d: %s  %s\n", e.id, o.pass ? "PASS" : "FAIL", e.title);
    for (const auto& l : o.lines) std::printf("    %s\n", l.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of 8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
