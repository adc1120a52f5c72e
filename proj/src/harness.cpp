#include "lstat/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "lstat/combinatorics.hpp"
#include "lstat/determinants.hpp"
#include "lstat/errors.hpp"
#include "lstat/sampler.hpp"

namespace lstat {

using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ValidationError("not a number: '" + s + "'");
  return v;
}

Rational json_rational(const json& v) {
  if (v.is_number_integer()) return Rational(std::to_string(v.get<long long>()));
  if (v.is_string()) return rational_from_string(v.get<std::string>());
  throw ValidationError("expected an integer or a rational string");
}

bool json_exactable(const json& v) { return v.is_number_integer() || v.is_string(); }

double json_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return rational_from_string(v.get<std::string>()).get_d();
  throw ValidationError("expected a number");
}

// Uniform integer in [lo, hi] by rejection.
long long uniform_int(RandomStream& rng, long long lo, long long hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x;
  do x = rng.bits();
  while (x >= limit);
  return lo + static_cast<long long>(x % span);
}

std::vector<Rational> random_vector(RandomStream& rng, int len, bool zero_sum) {
  for (;;) {
    std::vector<Rational> k;
    long long s = 0;
    for (int i = 0; i < len - (zero_sum ? 1 : 0); ++i) {
      long long v = uniform_int(rng, -20, 20);
      s += v;
      k.emplace_back(static_cast<long>(v));
    }
    if (zero_sum) {
      if (std::llabs(s) > 20) continue;
      k.emplace_back(static_cast<long>(-s));
    }
    return k;
  }
}

json rational_list(std::span<const Rational> k) {
  json a = json::array();
  for (const auto& x : k) a.push_back(x.get_str());
  return a;
}

struct IdentityTally {
  std::string name;
  std::string detail;
  long long trials = 0;
  bool passed = true;
  json counterexample = nullptr;

  void record(bool ok, const json& witness) {
    ++trials;
    if (!ok && passed) {
      passed = false;
      counterexample = witness;
    }
  }
  json to_json() const {
    return {{"name", name}, {"detail", detail}, {"trials", trials}, {"passed", passed},
            {"counterexample", counterexample}};
  }
};

std::vector<Rational> negated(std::span<const Rational> k) {
  std::vector<Rational> out;
  for (const auto& x : k) out.emplace_back(-x);
  return out;
}

bool within(double a, double b, double rel, double abs_tol) {
  const double d = std::abs(a - b);
  return d <= abs_tol || d <= rel * std::max(std::abs(a), std::abs(b));
}

std::string write_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += '\n';
  }
  return out;
}

std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed) throw ValidationError("--seed is required for '" + cfg.subcommand + "'");
  return *cfg.seed;
}

}  // namespace

// ------------------------------------------------------------------ config

double RunConfig::tolerance(const std::string& name, double fallback) const {
  auto it = tol.find(name);
  return it == tol.end() ? fallback : it->second;
}

double RunConfig::theta0_for(const Ensemble& e) const {
  if (theta0) return *theta0;
  return e.is_unitary() ? 0.0 : pi / 2;
}

void RunConfig::validate() const {
  for (const auto& [k, v] : tol)
    if (!(v > 0)) throw ValidationError("tolerance '" + k + "' must be positive");
  if (format != "json" && format != "csv") throw ValidationError("--format must be json or csv");
  for (int v : n)
    if (v < 1) throw ValidationError("n values must be >= 1");
  for (int v : ell)
    if (v < 1) throw ValidationError("ell values must be >= 1");
  for (double v : L)
    if (!(v >= 1)) throw ValidationError("L values must be >= 1");
}

json RunConfig::to_json() const {
  json j;
  j["subcommand"] = subcommand;
  j["ensemble"] = ensemble;
  j["n"] = n;
  j["ell"] = ell;
  j["t"] = t;
  j["L"] = L;
  j["theta0"] = theta0 ? json(*theta0) : json(nullptr);
  j["f"] = json::parse(f);
  j["g"] = json::parse(g);
  j["samples"] = samples;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["format"] = format;
  j["tol"] = tol;
  j["max_ell"] = max_ell;
  j["trials"] = trials;
  return j;
}

void apply_config_json(RunConfig& cfg, const json& doc) {
  if (!doc.is_object()) throw ValidationError("config must be a JSON object");
  auto int_list = [](const json& v) {
    if (v.is_array()) return v.get<std::vector<int>>();
    if (v.is_number_integer()) return std::vector<int>{v.get<int>()};
    return parse_int_list(v.get<std::string>());
  };
  auto double_list = [](const json& v) {
    if (v.is_array()) return v.get<std::vector<double>>();
    if (v.is_number()) return std::vector<double>{v.get<double>()};
    return parse_double_list(v.get<std::string>());
  };
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "subcommand") cfg.subcommand = v.get<std::string>();
      else if (key == "ensemble") cfg.ensemble = v.get<std::string>();
      else if (key == "n") cfg.n = int_list(v);
      else if (key == "ell") cfg.ell = int_list(v);
      else if (key == "t") cfg.t = double_list(v);
      else if (key == "L") cfg.L = double_list(v);
      else if (key == "theta0") cfg.theta0 = v.is_null() ? std::optional<double>() : v.get<double>();
      else if (key == "f") cfg.f = v.is_string() ? v.get<std::string>() : v.dump();
      else if (key == "g") cfg.g = v.is_string() ? v.get<std::string>() : v.dump();
      else if (key == "samples") cfg.samples = v.get<std::size_t>();
      else if (key == "seed") cfg.seed = v.is_null() ? std::optional<std::uint64_t>() : v.get<std::uint64_t>();
      else if (key == "out") cfg.out = v.get<std::string>();
      else if (key == "format") cfg.format = v.get<std::string>();
      else if (key == "tol") {
        for (const auto& [name, value] : v.items()) cfg.tol[name] = value.get<double>();
      } else if (key == "max_ell") cfg.max_ell = v.get<int>();
      else if (key == "trials") cfg.trials = v.get<int>();
      else if (key == "threads") cfg.threads = v.get<unsigned>();
      else if (key == "caps") {
        for (const auto& [name, value] : v.items()) {
          if (name == "max_ell") cfg.caps.max_ell = value.get<int>();
          else if (name == "max_n") cfg.caps.max_n = value.get<int>();
          else if (name == "max_degree") cfg.caps.max_degree = value.get<int>();
          else if (name == "max_degree_times_ell") cfg.caps.max_degree_times_ell = value.get<int>();
          else throw ValidationError("unknown cap '" + name + "'");
        }
      } else if (key == "comment" || key == "expect_exit") {
      } else {
        throw ValidationError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    auto parts = split(item, ':');
    auto as_int = [](const std::string& s) {
      double d = to_double(s);
      if (d != std::floor(d)) throw ValidationError("not an integer: '" + s + "'");
      return static_cast<int>(d);
    };
    if (parts.size() == 1) {
      out.push_back(as_int(parts[0]));
    } else if (parts.size() == 2 || parts.size() == 3) {
      int a = as_int(parts[0]), b = as_int(parts[1]), s = parts.size() == 3 ? as_int(parts[2]) : 1;
      if (s <= 0) throw ValidationError("range step must be positive");
      for (int v = a; v <= b; v += s) out.push_back(v);
    } else {
      throw ValidationError("bad range '" + item + "'");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    auto parts = split(item, ':');
    if (parts.size() == 1) {
      out.push_back(to_double(parts[0]));
    } else if (parts.size() == 3) {
      double a = to_double(parts[0]), b = to_double(parts[1]), s = to_double(parts[2]);
      if (!(s > 0)) throw ValidationError("range step must be positive");
      const int count = static_cast<int>(std::floor((b - a) / s + 1e-9)) + 1;
      for (int i = 0; i < count; ++i) out.push_back(a + i * s);
    } else {
      throw ValidationError("bad range '" + item + "' (use a:b:step)");
    }
  }
  return out;
}

FourierPoly parse_poly_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("f: ") + e.what());
  }
  if (!doc.is_array()) throw ValidationError("f must be a JSON array of [k, re, im] triples");
  bool exact = true;
  for (const auto& e : doc) {
    if (!e.is_array() || e.size() < 2 || e.size() > 3 || !e[0].is_number_integer())
      throw ValidationError("f entries must look like [k, re, im]");
    for (std::size_t i = 1; i < e.size(); ++i) exact = exact && json_exactable(e[i]);
  }
  if (exact) {
    std::vector<std::pair<int, ComplexRational>> pairs;
    for (const auto& e : doc)
      pairs.emplace_back(e[0].get<int>(), ComplexRational(json_rational(e[1]), e.size() > 2 ? json_rational(e[2]) : 0));
    return make_poly(pairs);
  }
  std::vector<std::pair<int, std::complex<double>>> pairs;
  for (const auto& e : doc)
    pairs.emplace_back(e[0].get<int>(), std::complex<double>(json_number(e[1]), e.size() > 2 ? json_number(e[2]) : 0));
  return make_poly(pairs);
}

LocalTestFunction parse_local_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("g: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("family")) throw ValidationError("g must be an object with a 'family'");
  const std::string family = doc["family"].get<std::string>();
  const json params = doc.value("params", json::object());
  auto num = [&](const char* name, double fallback) {
    return params.contains(name) ? json_number(params[name]) : fallback;
  };
  if (family == "triangle") return LocalTestFunction::triangle(num("width", 1), num("height", 1));
  if (family == "gauss") return LocalTestFunction::gauss(num("sigma", 1));
  if (family == "sinc2") return LocalTestFunction::sinc2(num("width", 1));
  if (family == "table" || family == "custom-table") {
    if (!params.contains("knots") || !params.contains("values"))
      throw ValidationError("table family needs 'knots' and 'values'");
    return LocalTestFunction::table(params["knots"].get<std::vector<double>>(),
                                    params["values"].get<std::vector<double>>());
  }
  throw ValidationError("unknown family '" + family + "'");
}

json local_to_json(const LocalTestFunction& g) {
  json params = json::object();
  for (const auto& [k, v] : g.params()) params[k] = v;
  if (g.family() == LocalFamily::table) {
    params["knots"] = g.knots();
    params["values"] = g.values();
  }
  return {{"family", g.family_name()}, {"params", params}};
}

// -------------------------------------------------------------- identities

CommandResult cmd_identities(int max_ell, int trials, std::uint64_t seed) {
  if (max_ell < 1 || max_ell > 6) throw ValidationError("identities: max_ell must be in 1..6");
  if (trials < 1) throw ValidationError("identities: trials must be >= 1");
  std::vector<IdentityTally> tallies;
  std::uint64_t stream = 0;

  {
    IdentityTally t{"composition_coefficient_sum", "sum of (-1)^(m-1)/m * l!/prod(l_i!) is 1 at l=1, 0 for 2<=l<=12"};
    for (int ell = 1; ell <= 12; ++ell) t.record(comp_coeff_sum(ell) == (ell == 1 ? 1 : 0), ell);
    tallies.push_back(t);
  }

  json table = json::array();
  if (max_ell >= 2) {
    for (int k = 0; k <= 10; ++k) {
      std::vector<Rational> v{Rational(k), Rational(-k)};
      const Rational g = g_direct(v), gm = g_direct(negated(v));
      table.push_back({{"k", k}, {"G(k,-k)", g.get_str()}, {"abs_k", k}, {"G(k,-k)+G(-k,k)", Rational(g + gm).get_str()}});
    }
    IdentityTally t{"two_point_limit", "G(k,-k) + G(-k,k) = |k| (l = 2)"};
    RandomStream rng(seed, stream++);
    for (int i = 0; i < trials; ++i) {
      auto k = random_vector(rng, 2, true);
      const Rational lhs = g_direct(k) + g_direct(negated(k));
      t.record(lhs == abs(k[0]), rational_list(k));
    }
    tallies.push_back(t);
  }

  if (max_ell >= 3) {
    IdentityTally t{"g_vanishes", "G(k) = 0 for 3 <= l <= max_ell"};
    RandomStream rng(seed, stream++);
    for (int ell = 3; ell <= max_ell; ++ell)
      for (int i = 0; i < trials; ++i) {
        auto k = random_vector(rng, ell, true);
        t.record(sgn(g_direct(k)) == 0, rational_list(k));
      }
    tallies.push_back(t);
  }

  if (max_ell >= 2) {
    IdentityTally t{"g_subset_form", "G by permutations equals G by subset re-summation"};
    RandomStream rng(seed, stream++);
    for (int ell = 2; ell <= max_ell; ++ell)
      for (int i = 0; i < trials; ++i) {
        auto k = random_vector(rng, ell, true);
        t.record(g_direct(k) == g_subset_form(k), rational_list(k));
      }
    tallies.push_back(t);

    IdentityTally perm{"g_symmetry_homogeneity", "G(sigma k) = G(k) and G(c k) = c G(k) for c > 0"};
    for (int ell = 2; ell <= max_ell; ++ell)
      for (int i = 0; i < trials; ++i) {
        auto k = random_vector(rng, ell, true);
        auto shuffled = k;
        for (int j = ell - 1; j > 0; --j) std::swap(shuffled[j], shuffled[uniform_int(rng, 0, j)]);
        Rational c(static_cast<long>(uniform_int(rng, 1, 9)), static_cast<long>(uniform_int(rng, 1, 9)));
        c.canonicalize();
        std::vector<Rational> scaled;
        for (const auto& x : k) scaled.emplace_back(c * x);
        const Rational g = g_direct(k);
        perm.record(g_direct(shuffled) == g && g_direct(scaled) == c * g, rational_list(k));
      }
    tallies.push_back(perm);

    IdentityTally rs{"rudnick_sarnak", "permutation maxima equal the subset sum for 2 <= m <= 7"};
    for (int m = 2; m <= 7; ++m)
      for (int i = 0; i < trials; ++i) {
        auto v = random_vector(rng, m, true);
        auto [lhs, rhs] = rs_identity_sides(v);
        rs.record(lhs == rhs, rational_list(v));
      }
    tallies.push_back(rs);
  }

  {
    IdentityTally t{"tree_sum", "U(k) = max(0, k) at l = 1 and U(k) = 0 for 2 <= l <= 5"};
    RandomStream rng(seed, stream++);
    const int top = std::min(max_ell, 5);
    for (int ell = 1; ell <= top; ++ell)
      for (int i = 0; i < trials; ++i) {
        auto k = random_vector(rng, ell, false);
        const Rational expect = ell == 1 ? (sgn(k[0]) > 0 ? k[0] : Rational(0)) : Rational(0);
        t.record(u_tree_sum(k) == expect, rational_list(k));
      }
    tallies.push_back(t);
  }

  {
    IdentityTally t{"tree_vs_two_point", "U(k) + U(-k) = G(k, k') + G(-k, -k') with k' = -sum(k), l <= 4"};
    RandomStream rng(seed, stream++);
    const int top = std::min(max_ell, 4);
    for (int ell = 1; ell <= top; ++ell)
      for (int i = 0; i < trials; ++i) {
        auto k = random_vector(rng, ell, false);
        Rational s = 0;
        for (const auto& x : k) s += x;
        auto ext = k;
        ext.emplace_back(-s);
        const Rational lhs = u_tree_sum(k) + u_tree_sum(negated(k));
        const Rational rhs = g_direct(ext) + g_direct(negated(ext));
        t.record(lhs == rhs, rational_list(k));
      }
    tallies.push_back(t);
  }

  if (max_ell >= 1) {
    IdentityTally t{"rotation", "tree maxima of T and W(T) agree after symmetrization, l + 1 <= 5"};
    IdentityTally order{"rotation_order", "W applied |T| + 1 times returns T"};
    RandomStream rng(seed, stream++);
    const int top = std::min(max_ell + 1, 5);
    for (int len = 2; len <= top; ++len) {
      const auto trees = enumerate_trees(len, TreeFilter{false, true, false});
      for (const auto& tree : trees) {
        Tree w = tree;
        for (int s = 0; s <= tree.size(); ++s) w = rotate_tree(w);
        json witness;
        for (const auto& b : tree.branches()) witness.push_back(b.bits());
        order.record(w == tree, witness);
      }
      const int reps = std::max(1, trials / 20);
      for (int i = 0; i < reps; ++i) {
        auto k = random_vector(rng, len, true);
        const auto nk = negated(k);
        for (const auto& tree : trees) {
          const Tree w = rotate_tree(tree);
          const bool ok = tree_maximum(tree, k) + tree_maximum(tree, nk) == tree_maximum(w, k) + tree_maximum(w, nk);
          if (!ok) {
            json witness = {{"k", rational_list(k)}, {"tree", json::array()}};
            for (const auto& b : tree.branches()) witness["tree"].push_back(b.bits());
            t.record(false, witness);
          } else {
            t.record(true, nullptr);
          }
        }
      }
    }
    tallies.push_back(t);
    tallies.push_back(order);
  }

  json report;
  report["seed"] = seed;
  report["max_ell"] = max_ell;
  report["trials"] = trials;
  report["identities"] = json::array();
  bool all = true;
  for (const auto& t : tallies) {
    report["identities"].push_back(t.to_json());
    all = all && t.passed;
  }
  report["g_two_point_table"] = table;
  report["passed"] = all;
  return {all ? exit_pass : exit_tolerance, report.dump(2) + "\n"};
}

// --------------------------------------------------------------- cumulants

CommandResult cmd_cumulants(const RunConfig& cfg) {
  const FourierPoly f = parse_poly_json(cfg.f);
  const double rel = cfg.tolerance("rel", 1e-6), abs_tol = cfg.tolerance("abs", 1e-8);
  json rows = json::array();
  std::vector<std::vector<std::string>> csv;
  bool all = true, numerical = false;
  const int ell_top = cfg.ell.empty() ? 0 : *std::max_element(cfg.ell.begin(), cfg.ell.end());

  for (int n : cfg.n) {
    const Ensemble e = Ensemble::parse(cfg.ensemble, n);
    std::optional<MgfCumulants> mgf;
    std::string mgf_error;
    if (ell_top >= 1) {
      try {
        const int lmax = std::min(ell_top, 4);
        if (e.is_unitary())
          mgf = cumulants_from_log_mgf([&](double t) { return log_toeplitz_mgf(f, t, n); }, lmax);
        else
          mgf = cumulants_from_mgf([&](double t) { return fredholm_mgf(e, f, t); }, lmax);
      } catch (const NumericalError& err) {
        mgf_error = err.what();
        numerical = true;
      }
    }
    for (int ell : cfg.ell) {
      CumulantReport r;
      r.ensemble = e;
      r.f = f.describe();
      r.ell = ell;
      json extra = json::object();
      std::vector<std::string> errors;
      try {
        if (e.is_unitary()) {
          auto d = cumulant_direct_unitary(f, n, ell, cfg.caps);
          r.value_direct = d.value;
          if (d.exact) extra["exact_direct"] = d.exact->get_str();
        }
      } catch (const ResourceError& err) {
        errors.push_back(std::string("direct: ") + err.what());
      }
      bool have_trace = true;
      try {
        r.value_trace = cumulant_trace(e, f, ell, cfg.caps);
      } catch (const ResourceError& err) {
        errors.push_back(std::string("trace: ") + err.what());
        have_trace = false;
      }
      if (mgf && ell <= 4) {
        r.value_mgf = mgf->extrapolated[ell - 1];
        extra["mgf_step_h"] = mgf->values[ell - 1];
        extra["mgf_flagged"] = mgf->flagged;
      } else if (!mgf_error.empty()) {
        errors.push_back("mgf: " + mgf_error);
      }
      r.value_limit = limit_cumulant(e, f, ell);

      std::vector<double> vals;
      if (have_trace) vals.push_back(r.value_trace);
      if (r.value_direct) vals.push_back(*r.value_direct);
      if (r.value_mgf) vals.push_back(*r.value_mgf);
      bool ok = true;
      for (std::size_t i = 0; i < vals.size(); ++i)
        for (std::size_t j = i + 1; j < vals.size(); ++j) ok = ok && within(vals[i], vals[j], rel, abs_tol);
      all = all && ok;

      json row = to_json(r);
      if (!have_trace) row["value_trace"] = nullptr;
      row["passed"] = ok;
      for (auto& [k, v] : extra.items()) row[k] = v;
      if (!errors.empty()) row["errors"] = errors;
      rows.push_back(row);
      csv.push_back({e.name(), std::to_string(n), std::to_string(ell),
                     r.value_direct ? fmt(*r.value_direct) : "", have_trace ? fmt(r.value_trace) : "",
                     r.value_mgf ? fmt(*r.value_mgf) : "", fmt(r.value_limit), fmt(r.max_abs_discrepancy()),
                     ok ? "1" : "0"});
    }
  }
  CommandResult out;
  out.exit_code = numerical ? exit_numerical : (all ? exit_pass : exit_tolerance);
  if (cfg.format == "csv") {
    out.output = write_csv({"ensemble", "n", "ell", "value_direct", "value_trace", "value_mgf", "value_limit",
                            "max_abs_discrepancy", "passed"},
                           csv);
  } else {
    json doc = {{"config", cfg.to_json()}, {"rows", rows}, {"passed", all}};
    out.output = doc.dump(2) + "\n";
  }
  return out;
}

// ------------------------------------------------------------------- szego

CommandResult cmd_szego(const RunConfig& cfg) {
  const FourierPoly f = parse_poly_json(cfg.f);
  std::vector<int> ns = cfg.n;
  std::sort(ns.begin(), ns.end());
  json rows = json::array();
  std::vector<std::vector<std::string>> csv;
  bool all = true;
  const double cap = cfg.tolerance("residual", INFINITY);
  for (double t : cfg.t) {
    double prev = INFINITY;
    for (int n : ns) {
      const double value = toeplitz_mgf(f, t, n);
      const double logv = log_toeplitz_extended(f, t, n);
      const double res = szego_residual(f, t, n);
      const bool shrinking = std::abs(res) < prev || res == 0;
      all = all && shrinking;
      prev = std::abs(res);
      rows.push_back({{"ensemble", "u"}, {"n", n}, {"t", t}, {"method", "toeplitz"}, {"value", value},
                      {"log_value", logv}, {"szego_residual", res}});
      csv.push_back({"u", std::to_string(n), fmt(t), "toeplitz", fmt(value), fmt(logv), fmt(res)});
    }
    if (!ns.empty()) all = all && std::abs(szego_residual(f, t, ns.back())) <= cap;
  }
  CommandResult out;
  out.exit_code = all ? exit_pass : exit_tolerance;
  if (cfg.format == "csv")
    out.output = write_csv({"ensemble", "n", "t", "method", "value", "log_value", "szego_residual"}, csv);
  else
    out.output = json{{"config", cfg.to_json()}, {"rows", rows}, {"passed", all}}.dump(2) + "\n";
  return out;
}

// --------------------------------------------------------------------- mgf

CommandResult cmd_mgf(const RunConfig& cfg) {
  const FourierPoly f = parse_poly_json(cfg.f);
  const double mgf_rel = cfg.tolerance("mgf_rel", 1e-9), weyl_abs = cfg.tolerance("weyl_abs", 1e-7);
  json rows = json::array();
  std::vector<std::vector<std::string>> csv;
  bool all = true;
  for (int n : cfg.n) {
    const Ensemble e = Ensemble::parse(cfg.ensemble, n);
    for (double t : cfg.t) {
      std::vector<std::pair<MgfMethod, double>> values;
      if (e.is_unitary()) values.emplace_back(MgfMethod::toeplitz, toeplitz_mgf(f, t, n));
      if (e.is_unitary() || f.even()) values.emplace_back(MgfMethod::fredholm, fredholm_mgf(e, f, t));
      if (n <= 3) values.emplace_back(MgfMethod::weyl_quadrature, weyl_quadrature_mgf(e, f, t));
      const double det = values.front().second;
      for (const auto& [m, v] : values) {
        bool ok = true;
        if (m == MgfMethod::fredholm && e.is_unitary()) ok = within(v, det, mgf_rel, 0);
        if (m == MgfMethod::weyl_quadrature) ok = std::abs(v - det) <= weyl_abs;
        all = all && ok;
        const bool szego = m == MgfMethod::toeplitz;
        const double res = szego ? szego_residual(f, t, n) : 0;
        json row = {{"ensemble", e.name()}, {"n", n},         {"t", t},
                    {"method", method_name(m)}, {"value", v}, {"log_value", std::log(v)},
                    {"passed", ok}};
        row["szego_residual"] = szego ? json(res) : json(nullptr);
        rows.push_back(row);
        csv.push_back({e.name(), std::to_string(n), fmt(t), method_name(m), fmt(v), fmt(std::log(v)),
                       szego ? fmt(res) : ""});
      }
    }
  }
  CommandResult out;
  out.exit_code = all ? exit_pass : exit_tolerance;
  if (cfg.format == "csv")
    out.output = write_csv({"ensemble", "n", "t", "method", "value", "log_value", "szego_residual"}, csv);
  else
    out.output = json{{"config", cfg.to_json()}, {"rows", rows}, {"passed", all}}.dump(2) + "\n";
  return out;
}

// ------------------------------------------------------------------ sample

CommandResult cmd_sample(const RunConfig& cfg) {
  const std::uint64_t seed = require_seed(cfg);
  if (cfg.n.empty()) throw ValidationError("sample needs --n");
  const Ensemble e = Ensemble::parse(cfg.ensemble, cfg.n.front());
  const FourierPoly f = parse_poly_json(cfg.f);
  const auto samples = sample_batch(e, seed, 0, cfg.samples, cfg.threads);
  CommandResult out;
  if (cfg.format == "csv") {
    std::string text = "sample_id,angle_index,angle\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
      for (std::size_t j = 0; j < samples[i].angles.size(); ++j)
        text += std::to_string(i) + "," + std::to_string(j) + "," + fmt(samples[i].angles[j]) + "\n";
    out.output = std::move(text);
    return out;
  }
  std::vector<double> values;
  for (const auto& s : samples) values.push_back(linear_statistic(s, f));
  json doc = {{"config", cfg.to_json()}, {"ensemble", e.name()}, {"n", e.n}, {"samples", samples.size()}};
  if (values.size() >= 8) doc["linear_statistic"] = to_json(empirical_cumulants(values));
  out.output = doc.dump(2) + "\n";
  return out;
}

// --------------------------------------------------------------------- clt

bool LocalCltResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CltCheck& c) { return c.passed; });
}

json LocalCltResult::to_json() const {
  json j;
  j["ensemble"] = ensemble.name();
  j["n"] = ensemble.n;
  j["L"] = L;
  j["theta0"] = theta0;
  j["mean_target"] = mean_target;
  j["oracle_mean"] = oracle_mean;
  j["oracle_variance"] = oracle_variance;
  j["limit_variance"] = limit_variance;
  j["failed_samples"] = failed_samples;
  if (values.size() >= 8) j["summary"] = lstat::to_json(empirical_cumulants(values, oracle_mean, limit_variance));
  j["checks"] = json::array();
  for (const auto& c : checks)
    j["checks"].push_back(
        {{"name", c.name}, {"value", c.value}, {"target", c.target}, {"allowed", c.allowed}, {"passed", c.passed}});
  j["passed"] = passed();
  return j;
}

namespace {

LocalCltResult local_clt_from_draws(const Ensemble& e, const LocalTestFunction& g, double L, double theta0,
                                    const std::vector<EigenSample>& draws, const std::vector<std::string>& failures,
                                    const EngineCaps& caps) {
  LocalCltResult r;
  r.ensemble = e;
  r.L = L;
  r.theta0 = theta0;
  const FourierPoly h = local_statistic_poly(e, g, L, theta0);
  r.mean_target = e.n * g.integral() / ((e.is_unitary() ? 2 * pi : pi) * L);
  r.oracle_mean = cumulant_trace(e, h, 1, caps);
  const MgfCumulants mc =
      e.is_unitary() ? cumulants_from_log_mgf([&](double t) { return log_toeplitz_mgf(h, t, e.n); }, 2)
                     : cumulants_from_mgf([&](double t) { return fredholm_mgf(e, h, t); }, 2);
  r.oracle_variance = mc.extrapolated[1];
  r.limit_variance = variance_limit_local(g);

  r.checks.push_back({"oracle_variance_vs_limit", r.oracle_variance, r.limit_variance, 0.1 * r.limit_variance,
                      std::abs(r.oracle_variance - r.limit_variance) <= 0.1 * r.limit_variance});

  for (std::size_t i = 0; i < draws.size(); ++i) {
    if (!failures[i].empty()) {
      ++r.failed_samples;
      continue;
    }
    r.values.push_back(linear_statistic(draws[i], h));
  }
  const EmpiricalSummary s = empirical_cumulants(r.values, r.oracle_mean, r.limit_variance);
  r.checks.push_back({"mc_mean_vs_target", s.k[0], r.mean_target, 4 * s.se[0],
                      std::abs(s.k[0] - r.mean_target) <= 4 * s.se[0]});
  r.checks.push_back({"mc_variance_vs_oracle", s.k[1], r.oracle_variance, 4 * s.se[1],
                      std::abs(s.k[1] - r.oracle_variance) <= 4 * s.se[1]});
  const double crit = ks_critical_1pct(s.count);
  r.checks.push_back({"ks_vs_limit_normal", s.ks_distance, 0, crit, s.ks_distance <= crit});
  return r;
}

std::vector<EigenSample> draw_checked(const Ensemble& e, std::uint64_t seed, std::size_t samples, unsigned threads,
                                      std::vector<std::string>& failures) {
  auto draws = sample_batch(e, seed, 0, samples, threads, &failures);
  const auto failed = static_cast<std::size_t>(
      std::count_if(failures.begin(), failures.end(), [](const std::string& s) { return !s.empty(); }));
  if (failed * 1000 > samples)
    throw NumericalError("sampler failed on " + std::to_string(failed) + " of " + std::to_string(samples) +
                             " samples; first: " +
                             *std::find_if(failures.begin(), failures.end(), [](auto& s) { return !s.empty(); }),
                         static_cast<double>(failed) / samples);
  return draws;
}

}  // namespace

LocalCltResult run_local_clt(const Ensemble& e, const LocalTestFunction& g, double L, double theta0,
                             std::size_t samples, std::uint64_t seed, unsigned threads, const EngineCaps& caps) {
  std::vector<std::string> failures;
  const auto draws = draw_checked(e, seed, samples, threads, failures);
  return local_clt_from_draws(e, g, L, theta0, draws, failures, caps);
}

CommandResult cmd_clt(const RunConfig& cfg) {
  const std::uint64_t seed = require_seed(cfg);
  if (cfg.samples < 1000) throw ValidationError("clt needs at least 1000 samples");
  if (cfg.n.empty() || cfg.L.empty()) throw ValidationError("clt needs --n and --L");
  const Ensemble e = Ensemble::parse(cfg.ensemble, cfg.n.front());
  const FourierPoly f = parse_poly_json(cfg.f);
  const LocalTestFunction g = parse_local_json(cfg.g);
  const double theta0 = cfg.theta0_for(e);
  const double se_mult = cfg.tolerance("se", 4.0);

  json doc = {{"config", cfg.to_json()}};
  bool all = true;
  std::vector<std::string> failures;
  const auto draws = draw_checked(e, seed, cfg.samples, cfg.threads, failures);

  // global statistic
  {
    const double mean = cumulant_trace(e, f, 1, cfg.caps);
    const double var = cumulant_trace(e, f, 2, cfg.caps);
    std::vector<double> values;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
      if (!failures[i].empty()) {
        ++failed;
        continue;
      }
      values.push_back(linear_statistic(draws[i], f));
    }
    const auto s = empirical_cumulants(values, mean, var);
    const bool mean_ok = std::abs(s.k[0] - mean) <= se_mult * s.se[0];
    const bool var_ok = std::abs(s.k[1] - var) <= se_mult * s.se[1];
    const bool ks_ok = s.ks_distance <= ks_critical_1pct(s.count);
    doc["global"] = {{"summary", to_json(s)},
                     {"limit_mean", limit_cumulant(e, f, 1)},
                     {"limit_variance", limit_cumulant(e, f, 2)},
                     {"exact_mean", mean},
                     {"exact_variance", var},
                     {"failed_samples", failed},
                     {"mean_passed", mean_ok},
                     {"variance_passed", var_ok},
                     {"ks_passed", ks_ok}};
    all = all && mean_ok && var_ok && ks_ok;
  }

  // local statistic, one block per L
  doc["local"] = json::array();
  for (double L : cfg.L) {
    const auto r = local_clt_from_draws(e, g, L, theta0, draws, failures, cfg.caps);
    json j = r.to_json();
    j["g"] = local_to_json(g);
    doc["local"].push_back(j);
    all = all && r.passed();
  }
  doc["passed"] = all;
  return {all ? exit_pass : exit_tolerance, doc.dump(2) + "\n"};
}

CommandResult run_command(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.subcommand == "identities")
    return cmd_identities(cfg.max_ell, cfg.trials, cfg.seed.value_or(1));
  if (cfg.subcommand == "cumulants") return cmd_cumulants(cfg);
  if (cfg.subcommand == "szego") return cmd_szego(cfg);
  if (cfg.subcommand == "mgf") return cmd_mgf(cfg);
  if (cfg.subcommand == "sample") return cmd_sample(cfg);
  if (cfg.subcommand == "clt") return cmd_clt(cfg);
  throw ValidationError("unknown subcommand '" + cfg.subcommand + "'");
}

}  // namespace lstat
