#include "lstat/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <thread>

#include "lstat/cumulants.hpp"
#include "lstat/errors.hpp"

namespace lstat {

namespace {

constexpr double pi = std::numbers::pi;

double conj_if_complex(double x) { return x; }
std::complex<double> conj_if_complex(std::complex<double> x) { return std::conj(x); }
double sq_abs(double x) { return x * x; }
double sq_abs(std::complex<double> x) { return std::norm(x); }

template <class T>
T from_phase(std::complex<double> z, EnsembleKind kind);

template <>
std::complex<double> from_phase(std::complex<double> z, EnsembleKind) {
  return z;
}

template <>
double from_phase(std::complex<double> z, EnsembleKind kind) {
  return kind == EnsembleKind::so_even ? z.real() : z.imag();
}

// Basis vector (phi_0(x), ..., phi_{n-1}(x)) via the phase recurrence.
template <class T>
void basis_vector(const ProjectionBasis& basis, double x, std::vector<T>& out) {
  const int n = basis.size();
  const EnsembleKind kind = basis.ensemble().kind;
  const std::complex<double> step = std::polar(1.0, x);
  std::complex<double> z = std::polar(1.0, basis.frequency(0) * x);
  const double norm = kind == EnsembleKind::unitary ? 1 / std::sqrt(2 * pi) : std::sqrt(2 / pi);
  for (int j = 0; j < n; ++j) {
    out[j] = from_phase<T>(z, kind) * norm;
    z *= step;
    // re-anchor now and then so the recurrence error stays at a few ulps
    if ((j & 31) == 31) z = std::polar(1.0, basis.frequency(j + 1) * x);
  }
  if (kind == EnsembleKind::so_even) out[0] = T(1 / std::sqrt(pi));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

double RandomStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

ProjectionSampler::ProjectionSampler(Ensemble e, int table_cells)
    : ens_(e), basis_(e), lo_(e.domain_lo()), hi_(e.domain_hi()) {
  if (table_cells < 16) throw ValidationError("proposal table needs at least 16 cells");
  cell_ = (hi_ - lo_) / table_cells;
  if (!e.is_unitary()) {
    // K(x,x) - n/pi is a trigonometric polynomial of degree D bounded by n/pi,
    // so |K''| <= D^2 n / pi (Bernstein) and linear interpolation is off by at
    // most cell^2/8 * sup|K''|.
    const double degree = 2 * basis_.max_frequency();
    margin_ = cell_ * cell_ / 8 * degree * degree * e.n / pi;
  }
  node_.resize(table_cells + 1);
  for (int c = 0; c <= table_cells; ++c) node_[c] = basis_.diagonal(lo_ + c * cell_) + margin_;
  cdf_.resize(table_cells + 1);
  cdf_[0] = 0;
  for (int c = 0; c < table_cells; ++c) cdf_[c + 1] = cdf_[c] + 0.5 * cell_ * (node_[c] + node_[c + 1]);
}

double ProjectionSampler::envelope(double x) const {
  const int cells = static_cast<int>(node_.size()) - 1;
  double pos = (x - lo_) / cell_;
  int c = std::clamp(static_cast<int>(std::floor(pos)), 0, cells - 1);
  double s = pos - c;
  return node_[c] + s * (node_[c + 1] - node_[c]);
}

double ProjectionSampler::propose(RandomStream& rng) const {
  const double target = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
  int c = static_cast<int>(it - cdf_.begin()) - 1;
  c = std::clamp(c, 0, static_cast<int>(node_.size()) - 2);
  const double a = node_[c], b = node_[c + 1];
  const double u = rng.uniform();
  // invert a s + (b - a) s^2 / 2 = u (a + b) / 2 on [0, 1]
  double s;
  const double d = b - a;
  if (std::abs(d) < 1e-12 * (a + b)) {
    s = u;
  } else {
    const double disc = a * a + d * u * (a + b);
    s = (2 * u * (a + b) / 2) / (a + std::sqrt(std::max(disc, 0.0)));
  }
  s = std::clamp(s, 0.0, 1.0);
  double x = lo_ + (c + s) * cell_;
  if (x >= hi_) x = ens_.is_unitary() ? lo_ : hi_;
  return x;
}

template <class T>
EigenSample ProjectionSampler::run(RandomStream& rng, SamplerStats& stats) const {
  const int n = ens_.n;
  std::vector<std::vector<T>> q;  // orthonormal basis of the chosen points' span
  q.reserve(n);
  std::vector<T> v(n), proj(n);
  std::vector<double> angles;
  angles.reserve(n);

  while (static_cast<int>(angles.size()) < n) {
    const double x = propose(rng);
    ++stats.proposals;
    const double threshold = rng.uniform() * envelope(x);
    basis_vector(basis_, x, v);
    double resid = 0;
    for (int j = 0; j < n; ++j) resid += sq_abs(v[j]);
    bool rejected = resid < threshold;
    for (std::size_t r = 0; r < q.size() && !rejected; ++r) {
      T dot = 0;
      for (int j = 0; j < n; ++j) dot += v[j] * conj_if_complex(q[r][j]);
      proj[r] = dot;
      resid -= sq_abs(dot);
      if (resid < threshold) rejected = true;
    }
    if (rejected) continue;
    if (resid < -1e-12) throw NumericalError("conditional kernel diagonal is negative", resid);
    if (resid < 1e-12) {
      ++stats.resampled_pivots;
      continue;
    }
    // Gram-Schmidt with one re-orthogonalization pass
    std::vector<T> w = v;
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t r = 0; r < q.size(); ++r) {
        T dot = 0;
        if (pass == 0) {
          dot = proj[r];
        } else {
          for (int j = 0; j < n; ++j) dot += w[j] * conj_if_complex(q[r][j]);
        }
        for (int j = 0; j < n; ++j) w[j] -= dot * q[r][j];
      }
    double norm = 0;
    for (int j = 0; j < n; ++j) norm += sq_abs(w[j]);
    norm = std::sqrt(norm);
    if (norm < 1e-6) {
      ++stats.resampled_pivots;
      continue;
    }
    for (int j = 0; j < n; ++j) w[j] /= norm;
    q.push_back(std::move(w));
    angles.push_back(x);
  }
  std::sort(angles.begin(), angles.end());
  EigenSample out;
  out.ensemble = ens_;
  out.angles = std::move(angles);
  return out;
}

EigenSample ProjectionSampler::sample(std::uint64_t seed, std::uint64_t stream, SamplerStats* stats) const {
  RandomStream rng(seed, stream);
  SamplerStats local;
  EigenSample s = ens_.is_unitary() ? run<std::complex<double>>(rng, local) : run<double>(rng, local);
  s.seed = seed;
  s.stream = stream;
  if (stats) {
    stats->proposals += local.proposals;
    stats->resampled_pivots += local.resampled_pivots;
  }
  return s;
}

EigenSample sample_angles(const Ensemble& e, std::uint64_t seed, std::uint64_t stream) {
  return ProjectionSampler(e).sample(seed, stream);
}

std::vector<EigenSample> sample_batch(const Ensemble& e, std::uint64_t seed, std::uint64_t first, std::size_t count,
                                      unsigned threads, std::vector<std::string>* failures) {
  const ProjectionSampler sampler(e);
  std::vector<EigenSample> out(count);
  if (failures) failures->assign(count, std::string());
  auto one = [&](std::size_t i) {
    if (!failures) {
      out[i] = sampler.sample(seed, first + i);
      return;
    }
    try {
      out[i] = sampler.sample(seed, first + i);
    } catch (const NumericalError& err) {
      out[i].ensemble = e;
      out[i].seed = seed;
      out[i].stream = first + i;
      (*failures)[i] = err.what();
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) one(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += threads) one(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  return out;
}

double linear_statistic(const EigenSample& s, const FourierPoly& f) {
  double total = 0;
  for (double a : s.angles) total += f.value(a);
  return total;
}

double local_statistic(const EigenSample& s, const LocalTestFunction& g, double L, double theta0) {
  return linear_statistic(s, local_statistic_poly(s.ensemble, g, L, theta0));
}

double local_statistic_direct(const EigenSample& s, const LocalTestFunction& g, double L, double theta0,
                              int images) {
  double total = 0;
  for (double a : s.angles)
    for (int m = -images; m <= images; ++m) {
      total += g.g(L * (a - theta0 + 2 * pi * m));
      if (!s.ensemble.is_unitary()) total += g.g(L * (-a - theta0 + 2 * pi * m));
    }
  return total;
}

namespace {

struct KStats {
  double k2, k3, k4;
};

KStats kstats_from_sums(long double m, long double s1, long double s2, long double s3, long double s4) {
  KStats k;
  k.k2 = static_cast<double>((m * s2 - s1 * s1) / (m * (m - 1)));
  k.k3 = static_cast<double>((m * m * s3 - 3 * m * s2 * s1 + 2 * s1 * s1 * s1) / (m * (m - 1) * (m - 2)));
  k.k4 = static_cast<double>(((m + 1) * m * m * s4 - 4 * (m + 1) * m * s3 * s1 - 3 * (m - 1) * m * s2 * s2 +
                              12 * m * s2 * s1 * s1 - 6 * s1 * s1 * s1 * s1) /
                             (m * (m - 1) * (m - 2) * (m - 3)));
  return k;
}

}  // namespace

EmpiricalSummary empirical_cumulants(std::span<const double> values, std::optional<double> mean,
                                     std::optional<double> variance) {
  const std::size_t N = values.size();
  if (N < 8) throw ValidationError("empirical_cumulants needs at least 8 values");
  EmpiricalSummary out;
  out.count = N;
  out.values.assign(values.begin(), values.end());

  long double sum = 0;
  for (double v : values) sum += v;
  const long double mu = sum / N;
  std::vector<long double> c(N);
  long double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (std::size_t i = 0; i < N; ++i) {
    c[i] = values[i] - mu;
    const long double x = c[i], x2 = x * x;
    s1 += x;
    s2 += x2;
    s3 += x2 * x;
    s4 += x2 * x2;
  }
  const KStats full = kstats_from_sums(N, s1, s2, s3, s4);
  out.k[0] = static_cast<double>(mu);
  out.k[1] = full.k2;
  out.k[2] = full.k3;
  out.k[3] = full.k4;

  // leave-one-out jackknife on the same centered power sums
  long double acc[4] = {0, 0, 0, 0}, acc2[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < N; ++i) {
    const long double x = c[i], x2 = x * x;
    const long double m = N - 1;
    const KStats k = kstats_from_sums(m, s1 - x, s2 - x2, s3 - x2 * x, s4 - x2 * x2);
    const long double vals[4] = {mu + (s1 - x) / m, k.k2, k.k3, k.k4};
    for (int j = 0; j < 4; ++j) {
      acc[j] += vals[j];
      acc2[j] += vals[j] * vals[j];
    }
  }
  for (int j = 0; j < 4; ++j) {
    const long double avg = acc[j] / N;
    const long double ss = std::max<long double>(acc2[j] - N * avg * avg, 0);
    out.se[j] = static_cast<double>(std::sqrt(ss * (N - 1) / N));
  }

  out.degenerate = !(out.k[1] > 0);
  out.ref_mean = mean.value_or(out.k[0]);
  out.ref_variance = variance.value_or(out.k[1]);
  out.ks_distance = out.ref_variance > 0 ? ks_distance_normal(values, out.ref_mean, out.ref_variance) : 1.0;
  return out;
}

double ks_distance_normal(std::span<const double> values, double mean, double variance) {
  if (!(variance > 0)) throw ValidationError("KS reference variance must be positive");
  std::vector<double> z(values.begin(), values.end());
  std::sort(z.begin(), z.end());
  const double sd = std::sqrt(variance);
  const double N = static_cast<double>(z.size());
  double d = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-(z[i] - mean) / (sd * std::numbers::sqrt2));
    d = std::max({d, (i + 1) / N - cdf, cdf - i / N});
  }
  return d;
}

double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

nlohmann::json to_json(const EmpiricalSummary& s, bool include_values) {
  nlohmann::json j;
  j["count"] = s.count;
  j["k"] = {s.k[0], s.k[1], s.k[2], s.k[3]};
  j["se"] = {s.se[0], s.se[1], s.se[2], s.se[3]};
  j["ks_distance"] = s.ks_distance;
  j["ks_critical_1pct"] = ks_critical_1pct(s.count);
  j["ref_mean"] = s.ref_mean;
  j["ref_variance"] = s.ref_variance;
  j["degenerate"] = s.degenerate;
  if (include_values) j["values"] = s.values;
  return j;
}

}  // namespace lstat
