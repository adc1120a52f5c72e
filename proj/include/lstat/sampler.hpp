#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lstat/ensemble.hpp"
#include "lstat/fourier.hpp"

namespace lstat {

struct EigenSample {
  Ensemble ensemble;
  std::vector<double> angles;  // sorted, inside the ensemble domain
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

// Independent random stream keyed by (seed, stream id): the same key always
// yields the same numbers, whatever thread asks for them.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

struct SamplerStats {
  std::uint64_t proposals = 0;
  std::uint64_t resampled_pivots = 0;
};

// Sequential sampler for the projection process of one ensemble. Holds the
// proposal table; sample() is const and safe to call from several threads.
class ProjectionSampler {
 public:
  explicit ProjectionSampler(Ensemble e, int table_cells = 4096);

  const Ensemble& ensemble() const { return ens_; }
  EigenSample sample(std::uint64_t seed, std::uint64_t stream, SamplerStats* stats = nullptr) const;

  // Proposal envelope: piecewise-linear interpolant of K(x, x) lifted by a
  // bound on the interpolation error, so it dominates K(x, x) everywhere.
  double envelope(double x) const;
  double envelope_margin() const { return margin_; }

 private:
  template <class T>
  EigenSample run(RandomStream& rng, SamplerStats& stats) const;
  double propose(RandomStream& rng) const;

  Ensemble ens_;
  ProjectionBasis basis_;
  double lo_, hi_, cell_;
  double margin_ = 0;
  std::vector<double> node_;  // envelope at the cell edges
  std::vector<double> cdf_;   // cumulative cell masses, cdf_[0] = 0
};

EigenSample sample_angles(const Ensemble& e, std::uint64_t seed, std::uint64_t stream);

// Samples stream ids first..first+count-1 on `threads` workers (0 = hardware
// concurrency). Output order is by stream id. With `failures` given, a sample
// whose construction throws NumericalError is left empty and its message
// stored at the same index; otherwise the error propagates.
std::vector<EigenSample> sample_batch(const Ensemble& e, std::uint64_t seed, std::uint64_t first, std::size_t count,
                                      unsigned threads = 0, std::vector<std::string>* failures = nullptr);

double linear_statistic(const EigenSample& s, const FourierPoly& f);
// sum_j g(L (theta_j - theta0)) with g periodized on the circle (and mirrored
// for SO/Sp, as in local_statistic_poly).
double local_statistic(const EigenSample& s, const LocalTestFunction& g, double L, double theta0);
// The same sum from the time-domain g with image sums |m| <= images.
double local_statistic_direct(const EigenSample& s, const LocalTestFunction& g, double L, double theta0,
                              int images = 64);

struct EmpiricalSummary {
  std::size_t count = 0;
  std::vector<double> values;
  double k[4] = {0, 0, 0, 0};   // k-statistics of orders 1..4
  double se[4] = {0, 0, 0, 0};  // jackknife standard errors
  double ks_distance = 0;       // against the reference normal
  double ref_mean = 0, ref_variance = 0;
  bool degenerate = false;
};

// Unbiased k-statistics with jackknife errors. KS is measured against
// N(mean, variance) when given, else against the fitted normal.
EmpiricalSummary empirical_cumulants(std::span<const double> values, std::optional<double> mean = std::nullopt,
                                     std::optional<double> variance = std::nullopt);

double ks_distance_normal(std::span<const double> values, double mean, double variance);
// Asymptotic 1% critical value 1.63 / sqrt(N).
double ks_critical_1pct(std::size_t n);

nlohmann::json to_json(const EmpiricalSummary& s, bool include_values = false);

}  // namespace lstat
