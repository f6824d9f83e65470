#include <cmath>

#include "doctest.h"
#include "latproph/errors.hpp"
#include "latproph/metrics.hpp"
#include "latproph/rng.hpp"

using namespace latproph;

TEST_CASE("mape by hand: (0.1 + 0.1)/2 * 100 = 10") {
  CHECK(mape({100.0, 200.0}, {110.0, 180.0}) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("perfect predictions give zero mape") {
  CHECK(mape({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
}

TEST_CASE("predictions are floored before the ratio") {
  const double m = mape({50.0}, {0.0});
  CHECK(m == doctest::Approx(100.0).epsilon(1e-6));  // |50 - 1e-6| / 50
  const double negative = mape({50.0}, {-3.0});
  CHECK(negative == m);  // negative predictions hit the same floor
}

TEST_CASE("mape input validation") {
  CHECK_THROWS_AS(mape({1.0, 2.0}, {1.0}), DimensionError);
  CHECK_THROWS_AS(mape({0.0}, {1.0}), NonPositiveTargetError);
  CHECK_THROWS_AS(mape({-1.0}, {1.0}), NonPositiveTargetError);
}

TEST_CASE("mape is invariant under common positive scaling") {
  Rng rng(11);
  std::vector<double> y(50), y_hat(50), y2(50), y_hat2(50);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = rng.uniform(0.5, 100.0);
    y_hat[i] = y[i] * rng.uniform(0.7, 1.3);
    y2[i] = 37.0 * y[i];
    y_hat2[i] = 37.0 * y_hat[i];
  }
  CHECK(mape(y, y_hat) == doctest::Approx(mape(y2, y_hat2)).epsilon(1e-12));
}

TEST_CASE("adjusted R^2 formula") {
  SUBCASE("perfect fit") {
    CHECK(adjusted_r2({1.0, 2.0, 3.0, 4.0}, {1.0, 2.0, 3.0, 4.0}, 1) == doctest::Approx(1.0));
  }
  SUBCASE("mean predictor, p = 1, n = 10: 1 - 9/8 = -0.125") {
    std::vector<double> y(10);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i);
    std::vector<double> y_hat(10, 4.5);
    CHECK(adjusted_r2(y, y_hat, 1) == doctest::Approx(-0.125).epsilon(1e-12));
  }
  SUBCASE("n=20, p=4, R2=0.988 -> approx 0.9848") {
    // build data with an exact R^2 of 0.988: SSE/SST = 0.012
    std::vector<double> y(20), y_hat(20);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<double>(i);
    // SST around mean 9.5 of 0..19 is 665; distribute SSE = 0.012*665 evenly
    const double per_sample_err = std::sqrt(0.012 * 665.0 / 20.0);
    for (std::size_t i = 0; i < y.size(); ++i) y_hat[i] = y[i] + per_sample_err;
    CHECK(r2(y, y_hat) == doctest::Approx(0.988).epsilon(1e-9));
    const double adj = adjusted_r2(y, y_hat, 4);
    CHECK(adj == doctest::Approx(1.0 - (1.0 - 0.988) * 19.0 / 15.0).epsilon(1e-9));
    CHECK(adj == doctest::Approx(0.9848).epsilon(1e-3));
  }
  SUBCASE("degenerate inputs") {
    CHECK_THROWS_AS(adjusted_r2({1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, 1), DegenerateError);
    CHECK_THROWS_AS(adjusted_r2({1.0, 2.0}, {1.0, 2.0}, 1), DegenerateError);
  }
}

TEST_CASE("adjusted R^2 never exceeds R^2, equal only at p = 0") {
  Rng rng(5);
  std::vector<double> y(30), y_hat(30);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = rng.uniform(1.0, 10.0);
    y_hat[i] = y[i] + rng.normal();
  }
  const double plain = r2(y, y_hat);
  CHECK(adjusted_r2(y, y_hat, 0) == doctest::Approx(plain).epsilon(1e-12));
  for (const std::size_t p : {1UL, 3UL, 7UL}) CHECK(adjusted_r2(y, y_hat, p) < plain);
}

TEST_CASE("mape_ci95 half-width") {
  SUBCASE("all equal -> zero width") {
    const auto [mean, half] = mape_ci95({5.0, 5.0, 5.0});
    CHECK(mean == 5.0);
    CHECK(half == 0.0);
  }
  SUBCASE("two samples by hand") {
    const auto [mean, half] = mape_ci95({0.0, 20.0});
    CHECK(mean == 10.0);
    // sample std of {0,20} is 14.1421..., half = 1.96 * sd / sqrt(2)
    CHECK(half == doctest::Approx(1.96 * 14.142135623730951 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(half == doctest::Approx(19.6).epsilon(1e-3));
  }
  SUBCASE("fewer than two samples rejected") {
    CHECK_THROWS_AS(mape_ci95({1.0}), DegenerateError);
  }
}

TEST_CASE("CI coverage simulation: roughly 95% of resamples cover the true mean") {
  // known distribution: uniform(0, 20), true mean 10
  Rng rng(123);
  int covered = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> apes(200);
    for (auto& a : apes) a = rng.uniform(0.0, 20.0);
    const auto [mean, half] = mape_ci95(apes);
    if (std::abs(mean - 10.0) <= half) ++covered;
  }
  const double coverage = static_cast<double>(covered) / trials;
  CHECK(coverage > 0.93);
  CHECK(coverage < 0.97);
}
