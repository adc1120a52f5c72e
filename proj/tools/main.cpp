#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lstat/errors.hpp"
#include "lstat/harness.hpp"

namespace {

// Raw flag values; applied on top of the config file so flags win.
struct Flags {
  std::optional<std::string> ensemble, n, ell, f, g, L, t, out, format, config;
  std::optional<double> theta0;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_ell, trials;
  std::optional<unsigned> threads;
  std::vector<std::string> tol;
};

void add_flags(CLI::App* sub, Flags& fl) {
  sub->add_option("--config", fl.config, "JSON config file; flags override its fields");
  sub->add_option("--ensemble", fl.ensemble, "u | so-even | so-odd | sp");
  sub->add_option("--n", fl.n, "matrix sizes: 8, 2,4,8, 2:16 or 2:16:2");
  sub->add_option("--ell", fl.ell, "cumulant orders (same range syntax)");
  sub->add_option("--f", fl.f, "trigonometric polynomial as [[k, re, im], ...]");
  sub->add_option("--g", fl.g, "local test function as {\"family\": ..., \"params\": {...}}");
  sub->add_option("--L", fl.L, "localization scales, list or a:b:step");
  sub->add_option("--theta0", fl.theta0, "localization centre");
  sub->add_option("--t", fl.t, "mgf parameters, list or a:b:step");
  sub->add_option("--samples", fl.samples, "Monte Carlo sample count");
  sub->add_option("--seed", fl.seed, "random seed");
  sub->add_option("--out", fl.out, "write the report here instead of stdout");
  sub->add_option("--format", fl.format, "json | csv");
  sub->add_option("--tol", fl.tol, "tolerance override name=value (repeatable)");
  sub->add_option("--max-ell", fl.max_ell, "identities: largest vector length");
  sub->add_option("--trials", fl.trials, "identities: random vectors per identity");
  sub->add_option("--threads", fl.threads, "sampler worker threads (0 = all cores)");
}

lstat::RunConfig build_config(const std::string& sub, const Flags& fl) {
  using namespace lstat;
  RunConfig cfg;
  if (fl.config) {
    std::ifstream in(*fl.config);
    if (!in) throw ValidationError("cannot open config '" + *fl.config + "'");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("config: ") + e.what());
    }
    apply_config_json(cfg, doc);
  }
  cfg.subcommand = sub;
  if (fl.ensemble) cfg.ensemble = *fl.ensemble;
  if (fl.n) cfg.n = parse_int_list(*fl.n);
  if (fl.ell) cfg.ell = parse_int_list(*fl.ell);
  if (fl.f) cfg.f = *fl.f;
  if (fl.g) cfg.g = *fl.g;
  if (fl.L) cfg.L = parse_double_list(*fl.L);
  if (fl.theta0) cfg.theta0 = *fl.theta0;
  if (fl.t) cfg.t = parse_double_list(*fl.t);
  if (fl.samples) cfg.samples = *fl.samples;
  if (fl.seed) cfg.seed = *fl.seed;
  if (fl.out) cfg.out = *fl.out;
  if (fl.format) cfg.format = *fl.format;
  if (fl.max_ell) cfg.max_ell = *fl.max_ell;
  if (fl.trials) cfg.trials = *fl.trials;
  if (fl.threads) cfg.threads = *fl.threads;
  for (const auto& item : fl.tol) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--tol expects name=value, got '" + item + "'");
    try {
      cfg.tol[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw ValidationError("--tol value is not a number: '" + item + "'");
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and Monte Carlo checks for linear eigenvalue statistics of classical compact groups"};
  app.require_subcommand(1);
  Flags flags;
  const char* names[][2] = {
      {"identities", "exact combinatorial identities on random integer vectors"},
      {"cumulants", "cumulant table across the direct, trace, mgf and limit paths"},
      {"szego", "Toeplitz determinant sweep against the strong Szego limit"},
      {"mgf", "determinant mgf by Toeplitz, Fredholm and Weyl quadrature"},
      {"sample", "draw eigenvalue angles from the Haar measure"},
      {"clt", "Monte Carlo report for the global and local CLT"},
  };
  for (auto& [name, help] : names) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : lstat::exit_usage;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    const lstat::RunConfig cfg = build_config(sub, flags);
    const lstat::CommandResult result = lstat::run_command(cfg);
    if (cfg.out.empty()) {
      std::cout << result.output;
    } else {
      std::ofstream out(cfg.out, std::ios::binary);
      if (!out) throw lstat::ValidationError("cannot write '" + cfg.out + "'");
      out << result.output;
    }
    return result.exit_code;
  } catch (const lstat::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << " (magnitude " << e.magnitude() << ")\n";
    return lstat::exit_numerical;
  } catch (const lstat::ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return lstat::exit_usage;
  } catch (const lstat::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lstat::exit_usage;
  } catch (const lstat::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lstat::exit_usage;
  }
}
