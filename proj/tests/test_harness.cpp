#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lstat/errors.hpp"
#include "lstat/harness.hpp"

using namespace lstat;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Structural comparison; numbers to 1e-9 relative (1e-12 absolute floor).
void compare_json(const json& want, const json& got, const std::string& path) {
  if (want.is_number() && got.is_number()) {
    const double a = want.get<double>(), b = got.get<double>();
    CHECK_MESSAGE(std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)) + 1e-12, path, ": ", a, " vs ", b);
    return;
  }
  REQUIRE_MESSAGE(want.type() == got.type(), path);
  if (want.is_object()) {
    CHECK_MESSAGE(want.size() == got.size(), path);
    for (auto& [k, v] : want.items()) {
      REQUIRE_MESSAGE(got.contains(k), path, ".", k);
      compare_json(v, got[k], path + "." + k);
    }
  } else if (want.is_array()) {
    REQUIRE_MESSAGE(want.size() == got.size(), path);
    for (std::size_t i = 0; i < want.size(); ++i) compare_json(want[i], got[i], path + "[" + std::to_string(i) + "]");
  } else {
    CHECK_MESSAGE(want == got, path);
  }
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("range lists") {
    CHECK(parse_int_list("8") == std::vector<int>{8});
    CHECK(parse_int_list("2,4,8") == std::vector<int>{2, 4, 8});
    CHECK(parse_int_list("2:5") == std::vector<int>{2, 3, 4, 5});
    CHECK(parse_int_list("2:9:3") == std::vector<int>{2, 5, 8});
    CHECK(parse_int_list("").empty());
    CHECK(parse_double_list("0.1,0.3") == std::vector<double>{0.1, 0.3});
    CHECK(parse_double_list("0:1:0.5").size() == 3);
    CHECK_THROWS_AS(parse_int_list("a"), ValidationError);
    CHECK_THROWS_AS(parse_int_list("1.5"), ValidationError);
    CHECK_THROWS_AS(parse_double_list("0:1"), ValidationError);
  }

  TEST_CASE("function specs") {
    auto f = parse_poly_json(R"([[1, 1, 0], [-1, 1, 0], [2, "1/2"], [-2, "1/2"]])");
    CHECK(f.is_exact());
    CHECK(f.exact_coeff(2) == ComplexRational(Rational(1, 2)));
    auto g = parse_poly_json("[[1, 0.5, 0.25], [-1, 0.5, -0.25]]");
    CHECK_FALSE(g.is_exact());
    CHECK(g.real_valued());
    CHECK_THROWS_AS(parse_poly_json("{}"), ValidationError);
    CHECK_THROWS_AS(parse_poly_json("[[1]]"), ValidationError);
    CHECK_THROWS_AS(parse_poly_json("[[1, 1], [1, 2]]"), ValidationError);

    auto t = parse_local_json(R"({"family": "triangle", "params": {"width": 2}})");
    CHECK(t.ghat(1.0) == doctest::Approx(0.5));
    auto tb = parse_local_json(R"({"family": "custom-table", "params": {"knots": [0, 1], "values": [1, 0]}})");
    CHECK(tb.family_name() == "table");
    CHECK(local_to_json(tb)["params"]["knots"].size() == 2);
    CHECK(parse_local_json(local_to_json(t).dump()).ghat(0.3) == t.ghat(0.3));
    CHECK_THROWS_AS(parse_local_json(R"({"family": "boxcar"})"), ValidationError);
  }

  TEST_CASE("config documents") {
    RunConfig cfg;
    apply_config_json(cfg, json::parse(R"({"ensemble": "sp", "n": "2:4", "t": [0.1], "tol": {"rel": 1e-5},
                                          "seed": 9, "caps": {"max_n": 64}})"));
    CHECK(cfg.ensemble == "sp");
    CHECK(cfg.n == std::vector<int>{2, 3, 4});
    CHECK(cfg.tolerance("rel", 1) == 1e-5);
    CHECK(cfg.tolerance("abs", 2) == 2);
    CHECK(*cfg.seed == 9);
    CHECK(cfg.caps.max_n == 64);
    CHECK_THROWS_AS(apply_config_json(cfg, json::parse(R"({"bogus": 1})")), ValidationError);
    cfg.tol["abs"] = -1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);

    RunConfig s;
    s.subcommand = "sample";
    CHECK_THROWS_AS(run_command(s), ValidationError);
    s.subcommand = "clt";
    s.seed = 1;
    s.samples = 10;
    CHECK_THROWS_AS(run_command(s), ValidationError);
    RunConfig bad;
    bad.subcommand = "plot";
    CHECK_THROWS_AS(run_command(bad), ValidationError);
    CHECK(RunConfig{}.theta0_for(Ensemble(EnsembleKind::so_odd, 3)) == doctest::Approx(M_PI / 2));
  }

  TEST_CASE("identities report") {
    auto a = cmd_identities(6, 200, 5);
    CHECK(a.exit_code == exit_pass);
    CHECK(a.output == cmd_identities(6, 200, 5).output);
    auto doc = json::parse(a.output);
    CHECK(doc["passed"] == true);
    for (const auto& id : doc["identities"]) CHECK_MESSAGE(id["passed"] == true, id["name"]);
    auto small = json::parse(cmd_identities(2, 20, 1).output);
    CHECK(small["g_two_point_table"].size() == 11);
    CHECK(small["g_two_point_table"][4]["G(k,-k)+G(-k,k)"] == "4");
    CHECK_THROWS_AS(cmd_identities(7, 10, 1), ValidationError);
  }

  TEST_CASE("cumulant table") {
    RunConfig cfg;
    cfg.subcommand = "cumulants";
    cfg.n = {2, 4, 8, 16};
    auto r = run_command(cfg);
    CHECK(r.exit_code == exit_pass);
    auto doc = json::parse(r.output);
    REQUIRE(doc["rows"].size() == 16);
    for (const auto& row : doc["rows"]) {
      const int ell = row["ell"];
      if (ell == 2) CHECK(row["value_trace"].get<double>() == doctest::Approx(2));
      if (ell >= 3) CHECK(std::abs(row["value_trace"].get<double>()) <= 1e-8);
    }
    cfg.n = {};
    auto empty = run_command(cfg);
    CHECK(empty.exit_code == exit_pass);
    CHECK(json::parse(empty.output)["rows"].empty());
    cfg.n = {4};
    cfg.ell = {5};
    auto capped = json::parse(run_command(cfg).output);
    CHECK(capped["rows"][0].contains("errors"));
    cfg.ell = {2};
    cfg.format = "csv";
    auto csv = run_command(cfg).output;
    CHECK(csv.rfind("ensemble,n,ell,value_direct,value_trace,value_mgf,value_limit,max_abs_discrepancy,passed\n", 0) ==
          0);
  }

  TEST_CASE("szego sweep") {
    RunConfig cfg;
    cfg.subcommand = "szego";
    cfg.n = parse_int_list("2:32");
    cfg.t = {0.0};
    cfg.format = "csv";
    auto r = run_command(cfg);
    CHECK(r.exit_code == exit_pass);
    CHECK(r.output.rfind("ensemble,n,t,method,value,log_value,szego_residual\n", 0) == 0);
    cfg.t = {0.4};
    cfg.tol["residual"] = 1e-8;
    CHECK(run_command(cfg).exit_code == exit_pass);
  }

  TEST_CASE("golden files") {
    const fs::path dir = LSTAT_GOLDEN_DIR;
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(dir / "configs")) {
      const auto name = entry.path().filename();
      const json config = read_json(entry.path());
      RunConfig cfg;
      apply_config_json(cfg, config);
      auto r = run_command(cfg);
      CHECK_MESSAGE(r.exit_code == config.value("expect_exit", 0), name.string());
      compare_json(read_json(dir / name), json::parse(r.output), name.string());
      ++seen;
    }
    CHECK(seen >= 5);
  }
}
