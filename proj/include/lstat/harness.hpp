#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lstat/cumulants.hpp"
#include "lstat/ensemble.hpp"
#include "lstat/fourier.hpp"

namespace lstat {

enum ExitCode { exit_pass = 0, exit_tolerance = 1, exit_usage = 2, exit_numerical = 3 };

struct RunConfig {
  std::string subcommand;
  std::string ensemble = "u";
  std::vector<int> n{8};
  std::vector<int> ell{1, 2, 3, 4};
  std::vector<double> t{0.5};
  std::vector<double> L{8.0};
  std::optional<double> theta0;  // default: 0 for unitary, pi/2 otherwise
  std::string f = "[[1,1,0],[-1,1,0]]";
  std::string g = R"({"family":"triangle","params":{"width":1,"height":1}})";
  std::size_t samples = 10000;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";
  std::map<std::string, double> tol;
  int max_ell = 6;
  int trials = 200;
  unsigned threads = 0;
  EngineCaps caps;

  double tolerance(const std::string& name, double fallback) const;
  double theta0_for(const Ensemble& e) const;
  void validate() const;
  nlohmann::json to_json() const;
};

// Fields of a JSON config document; keys match the CLI flag names.
void apply_config_json(RunConfig& cfg, const nlohmann::json& doc);

// "8", "2,4,8", "2:16" (step 1) or "2:16:2"
std::vector<int> parse_int_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

// [[k, re, im], ...]; entries that are all integers or "p/q" strings give an
// exact poly.
FourierPoly parse_poly_json(const std::string& text);
// {"family": "triangle" | "gauss" | "sinc2" | "table", "params": {...}}
LocalTestFunction parse_local_json(const std::string& text);
nlohmann::json local_to_json(const LocalTestFunction& g);

struct CommandResult {
  int exit_code = exit_pass;
  std::string output;
};

CommandResult cmd_identities(int max_ell, int trials, std::uint64_t seed);
CommandResult cmd_cumulants(const RunConfig& cfg);
CommandResult cmd_szego(const RunConfig& cfg);
CommandResult cmd_mgf(const RunConfig& cfg);
CommandResult cmd_sample(const RunConfig& cfg);
CommandResult cmd_clt(const RunConfig& cfg);
CommandResult run_command(const RunConfig& cfg);

// Monte Carlo check of the CLT for one statistic.
struct CltCheck {
  std::string name;
  double value = 0;
  double target = 0;
  double allowed = 0;  // |value - target| <= allowed, or value <= allowed for KS
  bool passed = false;
};

struct LocalCltResult {
  Ensemble ensemble;
  double L = 0, theta0 = 0;
  double mean_target = 0;      // n / (2 pi L) int g, or n / (pi L) int g
  double oracle_mean = 0;      // exact finite-n mean
  double oracle_variance = 0;  // exact finite-n variance
  double limit_variance = 0;   // (1/2pi) int |ghat|^2 |t| dt
  std::size_t failed_samples = 0;
  std::vector<double> values;
  std::vector<CltCheck> checks;
  bool passed() const;
  nlohmann::json to_json() const;
};

LocalCltResult run_local_clt(const Ensemble& e, const LocalTestFunction& g, double L, double theta0,
                             std::size_t samples, std::uint64_t seed, unsigned threads = 0,
                             const EngineCaps& caps = {});

}  // namespace lstat
