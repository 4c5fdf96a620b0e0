#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pchaz/errors.hpp"
#include "pchaz/flsa.hpp"
#include "pchaz/rng.hpp"

using namespace pchaz;

namespace {

std::vector<double> noisy_steps(Rng& rng, std::size_t m, double noise) {
  std::vector<double> y(m);
  double level = rng.normal();
  for (std::size_t j = 0; j < m; ++j) {
    if (rng.uniform() < 0.05) level = rng.normal() * 2.0;
    y[j] = level + noise * rng.normal();
  }
  return y;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("degenerate lambdas") {
  const std::vector<double> y{3.0, -1.0, 2.5, 0.0, 7.0};
  CHECK(flsa_solve(y, 0.0).alpha == y);
  const std::vector<double> one{4.2};
  CHECK(flsa_solve(one, 100.0).alpha == one);
  const FusedLassoFit sat = flsa_solve(y, 1e6);
  for (double a : sat.alpha) CHECK(a == doctest::Approx(2.3).epsilon(1e-12));
  CHECK(sat.changepoints.empty());
  CHECK(sat.blocks.size() == 1);
}

TEST_CASE("two-level example") {
  const std::vector<double> y{0, 0, 1, 1};
  const FusedLassoFit fit = flsa_solve(y, 0.25);
  const std::vector<double> want{0.25, 0.25, 0.75, 0.75};
  CHECK(max_abs_diff(fit.alpha, want) <= 1e-14);
  CHECK(fit.changepoints == std::vector<std::size_t>{2});
  REQUIRE(fit.blocks.size() == 2);
  CHECK(fit.blocks[0].start == 0);
  CHECK(fit.blocks[0].end == 1);
  CHECK(fit.blocks[1].start == 2);
  CHECK(fit.blocks[1].end == 3);
  CHECK(max_abs_diff(oracle::flsa_dual_gradient(y, 0.25), want) <= 1e-8);
  CHECK(max_abs_diff(reparametrized_check(y, 0.25), want) <= 1e-8);
}

TEST_CASE("input validation") {
  const std::vector<double> y{1, 2};
  CHECK_THROWS_AS(flsa_solve(y, -1.0), ValidationError);
  const std::vector<double> bad{1, NAN};
  CHECK_THROWS_AS(flsa_solve(bad, 1.0), ValidationError);
  CHECK_THROWS_AS(flsa_solve(std::vector<double>{}, 1.0), ValidationError);
}

TEST_CASE("KKT certificate and dual-gradient oracle on random instances") {
  Rng rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + rng.next_u64() % 199;
    const auto y = noisy_steps(rng, m, 0.5);
    const double lambda = std::exp(rng.uniform(-6, 1));
    const FusedLassoFit fit = flsa_solve(y, lambda);
    CHECK(oracle::kkt_violation(y, fit.alpha, lambda) <= 1e-9);
    CHECK(oracle::block_kkt_violation(y, fit.alpha, lambda) <= 1e-9);
    if (trial % 10 == 0) {
      const auto ref = oracle::flsa_dual_gradient(y, lambda);
      CHECK(max_abs_diff(fit.alpha, ref) <= 1e-6);
      CHECK(flsa_objective(y, fit.alpha, lambda) <= flsa_objective(y, ref, lambda) + 1e-9);
    }
  }
}

TEST_CASE("scaling and shift equivariance") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + rng.next_u64() % 100;
    const auto y = noisy_steps(rng, m, 1.0);
    const double lambda = std::exp(rng.uniform(-4, 0));
    const auto base = flsa_solve(y, lambda).alpha;
    for (double c : {0.5, 2.0, 8.0}) {
      std::vector<double> cy(y);
      for (double& v : cy) v *= c;
      const auto scaled = flsa_solve(cy, c * lambda).alpha;
      for (std::size_t j = 0; j < m; ++j) CHECK(std::abs(scaled[j] - c * base[j]) <= 1e-12 * std::max(1.0, c));
    }
    std::vector<double> sy(y);
    for (double& v : sy) v += 3.0;
    const auto shifted = flsa_solve(sy, lambda).alpha;
    for (std::size_t j = 0; j < m; ++j) CHECK(std::abs(shifted[j] - base[j] - 3.0) <= 1e-12);
  }
}

TEST_CASE("solution path") {
  SUBCASE("constant input") {
    const std::vector<double> y(7, 2.0);
    const auto path = flsa_path(y);
    REQUIRE(path.size() == 1);
    CHECK(path[0].lambda == 0.0);
    CHECK(path[0].changepoint_count == 0);
  }
  SUBCASE("two points merge once") {
    const std::vector<double> y{0, 1};
    const auto path = flsa_path(y);
    REQUIRE(path.size() == 2);
    CHECK(path[0].changepoint_count == 1);
    CHECK(path[1].lambda == doctest::Approx(0.5));
    CHECK(path[1].changepoint_count == 0);
    for (double lam = 0.0; lam < 1.0; lam += 0.01) {
      const FusedLassoFit fit = flsa_solve(y, lam);
      CHECK(fit.changepoints.size() == path_count_at(path, lam));
      if (lam > 0.5 + 1e-12) CHECK(max_abs_diff(fit.alpha, std::vector<double>{0.5, 0.5}) <= 1e-14);
    }
  }
  SUBCASE("random input: monotone counts, agreement off the breakpoints") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const auto y = noisy_steps(rng, 50, 0.7);
      const auto path = flsa_path(y);
      REQUIRE(!path.empty());
      CHECK(path.front().lambda == 0.0);
      CHECK(path.back().changepoint_count == 0);
      for (std::size_t k = 1; k < path.size(); ++k) {
        CHECK(path[k].lambda > path[k - 1].lambda);
        CHECK(path[k].changepoint_count < path[k - 1].changepoint_count);
      }
      for (std::size_t k = 0; k < path.size(); ++k) {
        const double lo = path[k].lambda;
        const double hi = k + 1 < path.size() ? path[k + 1].lambda : 2.0 * lo + 1.0;
        for (double lam : {lo + 1e-6 * (hi - lo), 0.5 * (lo + hi), hi - 1e-6 * (hi - lo)}) {
          CHECK(flsa_solve(y, lam).changepoints.size() == path[k].changepoint_count);
          CHECK(max_abs_diff(flsa_path_solution(y, lam), flsa_solve(y, lam).alpha) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("interpolation") {
  const Window unit{0.0, 1.0};
  SUBCASE("constant") {
    const auto sf = interpolate(FusedLassoFit::from_alpha({2, 2, 2}, 0.1), unit);
    CHECK(sf.breaks().empty());
    CHECK(sf.levels() == std::vector<double>{2});
  }
  SUBCASE("two levels: alpha_1 also covers the first cell") {
    const auto fit = FusedLassoFit::from_alpha({1, 1, 2, 2}, 0.1);
    const auto sf = interpolate(fit, unit);
    CHECK(sf.breaks() == std::vector<double>{0.75});
    CHECK(sf.levels() == std::vector<double>{1, 2});
    CHECK(changepoint_times(fit, unit) == std::vector<double>{0.75});
  }
  SUBCASE("single point") {
    const auto sf = interpolate(FusedLassoFit::from_alpha({5}, 0.0), unit);
    CHECK(sf.breaks().empty());
    CHECK(sf.levels() == std::vector<double>{5});
  }
  SUBCASE("jump into the last element only touches tau_max") {
    const auto sf = interpolate(FusedLassoFit::from_alpha({1, 1, 1, 3}, 0.0), unit);
    CHECK(sf.breaks().empty());
  }
  SUBCASE("back-transformation to original units") {
    const auto sf = interpolate(FusedLassoFit::from_alpha({4, 4, 8, 8, 8}, 0.0), Window{2.0, 4.0});
    CHECK(sf.breaks() == std::vector<double>{2.0 + 3 * 2.0 / 5});
    CHECK(sf.levels() == std::vector<double>{2, 4});
    CHECK(sf.domain() == Window{2.0, 4.0});
  }
}

TEST_CASE("reparametrized lasso agrees with the dynamic program") {
  const std::vector<double> y{3, 1, 4, 1, 5, 9, 2, 6};
  CHECK(max_abs_diff(reparametrized_check(y, 0.0), y) <= 1e-12);
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto z = noisy_steps(rng, 20, 0.5);
    const double lambda = std::exp(rng.uniform(-5, 0));
    CHECK(max_abs_diff(reparametrized_check(z, lambda), flsa_solve(z, lambda).alpha) <= 1e-6);
  }
}

TEST_CASE("normalized partial sums") {
  const std::vector<double> u{1, -2, 3};
  // best window is {3}: 3 / 1
  CHECK(max_normalized_partial_sum(u) == doctest::Approx(3.0));
  const std::vector<double> v{1, 1, 1, 1};
  CHECK(max_normalized_partial_sum(v) == doctest::Approx(2.0));
}

TEST_CASE("elementwise bound") {
  SUBCASE("noiseless data: kappa vanishes") {
    std::vector<double> truth(60, 1.0);
    for (std::size_t j = 20; j < 45; ++j) truth[j] = 3.0;
    for (double lambda : {0.001, 0.01, 0.1}) {
      const auto fit = flsa_solve(truth, lambda);
      CHECK(elementwise_bound_check(fit, truth, truth, lambda));
      const auto b = elementwise_bound(truth, 0.0, lambda);
      CHECK(b[0] == doctest::Approx(2.0 * 60 * lambda / 20));
    }
  }
  SUBCASE("random Gaussian instances with lambda = kappa / sqrt(m)") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t m = 100;
      std::vector<double> truth(m, 0.0), y(m);
      for (std::size_t j = 30; j < 70; ++j) truth[j] = 2.0;
      for (std::size_t j = 70; j < m; ++j) truth[j] = -1.0;
      std::vector<double> u(m);
      for (std::size_t j = 0; j < m; ++j) {
        u[j] = rng.normal();
        y[j] = truth[j] + u[j];
      }
      const double lambda = max_normalized_partial_sum(u) / std::sqrt(double(m));
      CHECK(elementwise_bound_check(flsa_solve(y, lambda), y, truth, lambda));
    }
  }
  SUBCASE("a wrong fit is caught") {
    std::vector<double> truth(40, 0.0);
    const auto wrong = FusedLassoFit::from_alpha(std::vector<double>(40, 5.0), 0.01);
    CHECK_FALSE(elementwise_bound_check(wrong, truth, truth, 0.01));
  }
  SUBCASE("grid mismatch") {
    const std::vector<double> a(5, 0.0), b(6, 0.0);
    CHECK_THROWS_AS(elementwise_bound_check(FusedLassoFit::from_alpha(a, 0.1), a, b, 0.1), ValidationError);
  }
}
