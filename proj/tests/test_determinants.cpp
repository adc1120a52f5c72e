#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lstat/cumulants.hpp"
#include "lstat/determinants.hpp"
#include "lstat/errors.hpp"

using namespace lstat;
using cd = std::complex<double>;

namespace {

constexpr double pi = std::numbers::pi;
const EnsembleKind kinds[] = {EnsembleKind::unitary, EnsembleKind::so_even, EnsembleKind::so_odd,
                              EnsembleKind::symplectic};

FourierPoly two_cos(int k) {
  return make_poly(std::vector<std::pair<int, ComplexRational>>{{k, {1}}, {-k, {1}}});
}

FourierPoly mixed() {
  return make_poly(std::vector<std::pair<int, ComplexRational>>{
      {1, {1}}, {-1, {1}}, {2, {Rational(1, 2)}}, {-2, {Rational(1, 2)}}});
}

double bessel_i(int m, double x) {
  const double t = x / 2;
  double term = std::pow(t, m) / std::tgamma(m + 1.0), sum = 0;
  for (int j = 0; j < 60; ++j) {
    sum += term;
    term *= t * t / ((j + 1.0) * (m + j + 1.0));
  }
  return sum;
}

}  // namespace

TEST_SUITE("determinants") {
  TEST_CASE("Toeplitz small cases against Bessel values") {
    auto f = two_cos(1);
    for (double t : {0.1, 0.5, -0.8}) {
      CHECK(toeplitz_mgf(f, t, 1) == doctest::Approx(bessel_i(0, 2 * t)).epsilon(1e-14));
      const double i0 = bessel_i(0, 2 * t), i1 = bessel_i(1, 2 * t), i2 = bessel_i(2, 2 * t);
      CHECK(toeplitz_mgf(f, t, 2) == doctest::Approx(i0 * i0 - i1 * i1).epsilon(1e-14));
      const double d3 = i0 * (i0 * i0 - i1 * i1) - i1 * (i1 * i0 - i1 * i2) + i2 * (i1 * i1 - i0 * i2);
      CHECK(toeplitz_mgf(f, t, 3) == doctest::Approx(d3).epsilon(1e-13));
    }
    CHECK(toeplitz_mgf(f, 0.0, 7) == 1.0);
  }

  TEST_CASE("Szego limit at n = 16") {
    CHECK(std::abs(std::log(toeplitz_mgf(two_cos(1), 0.5, 16)) - 0.25) <= 1e-6);
  }

  TEST_CASE("Toeplitz equals Fredholm on U(n)") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<std::pair<int, cd>> pairs{{0, u(rng)}};
      for (int k = 1; k <= 3; ++k) {
        cd c(u(rng) / k, u(rng) / k);
        pairs.emplace_back(k, c);
        pairs.emplace_back(-k, std::conj(c));
      }
      auto f = make_poly(pairs);
      for (int n : {1, 4, 11, 32})
        for (double t : {-1.0, -0.3, 0.4, 1.0}) {
          const double a = toeplitz_mgf(f, t, n);
          const double b = fredholm_mgf(Ensemble(EnsembleKind::unitary, n), f, t);
          CHECK(std::abs(a - b) <= 1e-9 * a);
        }
    }
  }

  TEST_CASE("SO(24) mgf near its asymptote") {
    const double v = fredholm_mgf(Ensemble(EnsembleKind::so_even, 12), two_cos(1), 0.5);
    CHECK(std::abs(std::log(v) - 0.125) <= 2e-2);
  }

  TEST_CASE("t = 0 and positivity") {
    for (auto kind : kinds) {
      Ensemble e(kind, 5);
      CHECK(fredholm_mgf(e, mixed(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
      std::vector<double> logs;
      for (int j = -6; j <= 6; ++j) {
        const double v = fredholm_mgf(e, mixed(), 0.2 * j);
        CHECK(v > 0);
        logs.push_back(std::log(v));
      }
      for (std::size_t i = 1; i + 1 < logs.size(); ++i) CHECK(logs[i - 1] + logs[i + 1] - 2 * logs[i] >= -1e-12);
    }
  }

  TEST_CASE("Weyl densities are normalized") {
    for (auto kind : kinds)
      for (int n = 1; n <= 3; ++n) {
        Ensemble e(kind, n);
        CHECK(weyl_normalization(e) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(weyl_quadrature_mgf(e, FourierPoly(), 0.7) == doctest::Approx(1.0).epsilon(1e-12));
      }
    CHECK_THROWS_AS(weyl_quadrature_mgf(Ensemble(EnsembleKind::unitary, 4), two_cos(1), 0.1), ResourceError);
    CHECK_THROWS_AS(weyl_quadrature_mgf(Ensemble(EnsembleKind::unitary, 2), two_cos(1), 0.1, 64), ValidationError);
  }

  TEST_CASE("U(2) Weyl density by hand") {
    // (1/(2 (2pi)^2)) |e^{ia} - e^{ib}|^2 = (1 - cos(a - b)) / (4 pi^2)
    std::vector<double> ang{0.3, -1.9};
    CHECK(weyl_density(Ensemble(EnsembleKind::unitary, 2), ang) ==
          doctest::Approx((1 - std::cos(2.2)) / (4 * pi * pi)).epsilon(1e-14));
  }

  TEST_CASE("Heine identity for every ensemble") {
    for (auto kind : kinds)
      for (int n = 1; n <= 3; ++n)
        for (double t : {0.1, 0.3}) {
          Ensemble e(kind, n);
          const double w = weyl_quadrature_mgf(e, mixed(), t);
          CHECK(std::abs(w - evaluate_mgf(e, mixed(), t).value) <= 1e-7);
        }
    CHECK(std::abs(weyl_quadrature_mgf(Ensemble(EnsembleKind::unitary, 2), two_cos(1), 0.3) -
                   toeplitz_mgf(two_cos(1), 0.3, 2)) <= 1e-8);
  }

  TEST_CASE("cumulants from closed-form mgfs") {
    auto a = cumulants_from_mgf([](double t) { return std::exp(1.5 * t); }, 4);
    auto g = cumulants_from_mgf([](double t) { return std::exp(-0.5 * t + 0.8 * t * t); }, 4);
    const double ga[] = {1.5, 0, 0, 0}, gg[] = {-0.5, 1.6, 0, 0};
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(a.extrapolated[i] - ga[i]) < 1e-8);
      CHECK(std::abs(g.extrapolated[i] - gg[i]) < 1e-8);
    }
    CHECK_FALSE(a.flagged);
    CHECK_THROWS_AS(cumulants_from_mgf([](double t) { return 2 + t; }, 2), ValidationError);
    CHECK_THROWS_AS(cumulants_from_mgf([](double t) { return std::exp(t); }, 5), ValidationError);
    // a log mgf with large high-order terms: the two steps disagree
    auto bad = cumulants_from_log_mgf([](double t) { return std::cosh(30.0L * t) - 1; }, 4);
    CHECK(bad.flagged);
  }

  TEST_CASE("cumulants from the Toeplitz mgf") {
    auto c = cumulants_from_log_mgf([](double t) { return log_toeplitz_mgf(two_cos(1), t, 8); }, 4);
    CHECK(std::abs(c.extrapolated[0]) < 1e-8);
    CHECK(std::abs(c.extrapolated[1] - 2) < 1e-6 * 2);
    CHECK(std::abs(c.extrapolated[2]) < 1e-8);
    CHECK(std::abs(c.extrapolated[3]) < 1e-8);
    for (int n : {2, 5})
      for (int ell = 1; ell <= 4; ++ell) {
        auto m = cumulants_from_log_mgf([&](double t) { return log_toeplitz_mgf(mixed(), t, n); }, 4);
        const double d = cumulant_direct_unitary(mixed(), n, ell).value;
        CHECK(std::abs(m.extrapolated[ell - 1] - d) <= std::max(1e-8, 1e-6 * std::abs(d)));
      }
  }

  TEST_CASE("Szego residuals") {
    auto f = two_cos(1);
    double prev = INFINITY;
    for (int n : {2, 4, 8, 16}) {
      const double r = szego_residual(f, 0.4, n);
      CHECK(std::abs(r) < prev);
      prev = std::abs(r);
    }
    auto c = make_poly(std::vector<std::pair<int, ComplexRational>>{{0, {Rational(3, 4)}}});
    for (int n : {1, 5, 20}) CHECK(szego_residual(c, 0.6, n) == 0.0);
    CHECK(std::abs(szego_residual(mixed(), 0.1, 4)) <= 1e-6);
    CHECK(szego_prediction(f, 0.5, 10) == doctest::Approx(0.25));
    CHECK(log_toeplitz_extended(f, 0.5, 16) == doctest::Approx(std::log(toeplitz_mgf(f, 0.5, 16))).epsilon(1e-13));
  }
}
