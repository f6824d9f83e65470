#include <cmath>

#include "doctest.h"
#include "latproph/errors.hpp"
#include "latproph/ols.hpp"
#include "latproph/rng.hpp"

using namespace latproph;

namespace {

std::vector<FeatureVector> random_feature_rows(std::size_t n, Rng& rng) {
  std::vector<FeatureVector> rows(n);
  for (auto& row : rows)
    for (auto& v : row) v = rng.uniform(0.0, 10.0);
  return rows;
}

}  // namespace

TEST_CASE("noiseless line: y = 3x + 1 on 5 points") {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 5; ++i) {
    X.push_back({static_cast<double>(i)});
    y.push_back(3.0 * i + 1.0);
  }
  const OlsModel m = fit_ols(X, y);
  CHECK(m.coefficients[0] == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(m.intercept == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("noiseless plane: y = 2x1 - x2 + 0.5 on 50 random points") {
  Rng rng(17);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 50; ++i) {
    const double x1 = rng.uniform(-5.0, 5.0);
    const double x2 = rng.uniform(-5.0, 5.0);
    X.push_back({x1, x2});
    y.push_back(2.0 * x1 - x2 + 0.5);
  }
  const OlsModel m = fit_ols(X, y);
  CHECK(m.coefficients[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(m.coefficients[1] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(m.intercept == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("duplicated feature column is rank deficient and names a column") {
  Rng rng(3);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 30; ++i) {
    const double x = rng.uniform(0.0, 1.0);
    X.push_back({x, x});
    y.push_back(x);
  }
  // either member of the collinear pair is a valid culprit to report
  try {
    fit_ols(X, y, {"left", "right"});
    FAIL("expected RankDeficientError");
  } catch (const RankDeficientError& e) {
    const std::string msg = e.what();
    CHECK((msg.find("left") != std::string::npos || msg.find("right") != std::string::npos));
  }
}

TEST_CASE("residuals have zero mean and are orthogonal to the design") {
  Rng rng(9);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  double norm_y = 0.0;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> row{rng.uniform(0.0, 1e6), rng.uniform(0.0, 10.0), rng.uniform(-2.0, 2.0)};
    const double target = 1e-3 * row[0] + 5.0 * row[1] - 3.0 * row[2] + 2.0 + rng.normal();
    X.push_back(std::move(row));
    y.push_back(target);
    norm_y += target * target;
  }
  norm_y = std::sqrt(norm_y);
  const OlsModel m = fit_ols(X, y);

  double residual_sum = 0.0;
  std::vector<double> xt_r(3, 0.0);
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double r = y[i] - m.predict_row(X[i]);
    residual_sum += r;
    for (std::size_t j = 0; j < 3; ++j) xt_r[j] += X[i][j] * r;
  }
  CHECK(std::abs(residual_sum / static_cast<double>(X.size())) < 1e-9 * norm_y);
  for (const double v : xt_r) CHECK(std::abs(v) < 1e-6 * norm_y);
}

TEST_CASE("affine equivariance: scaling a column scales its coefficient") {
  Rng rng(21);
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (int i = 0; i < 80; ++i) {
    std::vector<double> row{rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0)};
    y.push_back(3.0 * row[0] - row[1] + 0.25 + 0.01 * rng.normal());
    X.push_back(std::move(row));
  }
  const OlsModel base = fit_ols(X, y);

  const double c = 1000.0;
  std::vector<std::vector<double>> X_scaled = X;
  for (auto& row : X_scaled) row[0] *= c;
  const OlsModel scaled = fit_ols(X_scaled, y);

  CHECK(scaled.coefficients[0] == doctest::Approx(base.coefficients[0] / c).epsilon(1e-9));
  for (std::size_t i = 0; i < X.size(); ++i)
    CHECK(scaled.predict_row(X_scaled[i]) ==
          doctest::Approx(base.predict_row(X[i])).epsilon(1e-9));
}

TEST_CASE("dimension preconditions") {
  CHECK_THROWS_AS(fit_ols({{1.0}, {2.0}}, {1.0}), DimensionError);
  CHECK_THROWS_AS(fit_ols({{1.0}}, {1.0}), DimensionError);  // n < p + 1
}

TEST_CASE("predict_ols evaluates the affine map") {
  OlsModel constant;
  constant.intercept = 7.0;
  FeatureVector x{};
  x.fill(123.0);
  CHECK(predict_ols(constant, x) == 7.0);

  OlsModel slope;
  slope.coefficients = {3.0};
  slope.intercept = 1.0;
  slope.selected_features = {"total_flops"};
  slope.resolve_indices();
  FeatureVector x2{};
  x2[kTotalFlops] = 2.0;
  CHECK(predict_ols(slope, x2) == 7.0);
}

TEST_CASE("noiseless fit reproduces the targets on train rows") {
  Rng rng(33);
  auto rows = random_feature_rows(60, rng);
  std::vector<double> y;
  for (const auto& row : rows) y.push_back(2.0 * row[kTotalFlops]);
  const auto [model, report] = stepwise_select(
      rows, y, std::vector<std::string>(feature_names().begin(), feature_names().end()), 0.0005);
  for (std::size_t i = 0; i < rows.size(); ++i)
    CHECK(predict_ols(model, rows[i]) == doctest::Approx(y[i]).epsilon(1e-8));
}

TEST_CASE("stepwise keeps only the informative prefix") {
  Rng rng(41);
  auto rows = random_feature_rows(300, rng);
  std::vector<double> y;
  for (const auto& row : rows) y.push_back(4.0 * row[kTotalFlops] + 0.5);

  const std::vector<std::string> order(feature_names().begin(), feature_names().end());
  const auto [model, report] = stepwise_select(rows, y, order, 0.0005);
  CHECK(report.chosen_k == 1);
  CHECK(report.steps[0].adjusted_r2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(model.selected_features.size() == 1);
  CHECK(model.selected_features[0] == "total_flops");
}

TEST_CASE("stepwise reproduces the flat-tail stop on a 0.970/0.985/0.987/0.988 ladder") {
  // construct data whose adjusted R^2 ladder matches the reference values:
  // y = a + b + c + d + noise components revealed one feature at a time.
  // Directly asserting the stop rule: improvements 0.015, 0.002, 0.001 then 0
  // with stop_delta 0.0005 keep exactly 4 features.
  Rng rng(55);
  const std::size_t n = 4000;
  std::vector<FeatureVector> rows(n);
  std::vector<double> y(n, 0.0);
  // independent standard-normal features
  for (auto& row : rows)
    for (auto& v : row) v = rng.normal();
  // variance shares chosen so the cumulative R^2 ladder is
  // 0.970 -> 0.985 -> 0.987 -> 0.988 -> flat; residual variance 0.012
  const double shares[4] = {0.970, 0.015, 0.002, 0.001};
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = std::sqrt(shares[0]) * rows[i][0] + std::sqrt(shares[1]) * rows[i][1] +
           std::sqrt(shares[2]) * rows[i][2] + std::sqrt(shares[3]) * rows[i][3] +
           std::sqrt(0.012) * rng.normal();
  }
  const std::vector<std::string> order(feature_names().begin(), feature_names().end());
  const auto [model, report] = stepwise_select(rows, y, order, 0.0005);
  // with 4000 samples the empirical ladder tracks the construction closely
  CHECK(report.steps[0].adjusted_r2 == doctest::Approx(0.970).epsilon(0.01));
  CHECK(report.steps[3].adjusted_r2 == doctest::Approx(0.988).epsilon(0.01));
  CHECK(report.chosen_k == 4);
  CHECK(model.selected_features.size() == 4);
}

TEST_CASE("pure-noise targets keep the single-feature fallback") {
  Rng rng(77);
  auto rows = random_feature_rows(200, rng);
  std::vector<double> y;
  for (std::size_t i = 0; i < rows.size(); ++i) y.push_back(rng.normal());
  const std::vector<std::string> order(feature_names().begin(), feature_names().end());
  const auto [model, report] = stepwise_select(rows, y, order, 0.0005);
  for (const auto& step : report.steps) CHECK(std::abs(step.adjusted_r2) < 0.2);
  CHECK(report.chosen_k >= 1);  // never zero features
  CHECK(model.selected_features.size() == report.chosen_k);
}

TEST_CASE("stepwise with stop_delta 0 keeps everything when every step improves") {
  Rng rng(88);
  auto rows = random_feature_rows(400, rng);
  std::vector<double> y;
  for (const auto& row : rows) {
    double target = 0.0;
    for (int f = 0; f < kFeatureCount; ++f)
      target += (1.0 + f) * row[static_cast<std::size_t>(f)];
    y.push_back(target + 0.01 * rng.normal());
  }
  const std::vector<std::string> order(feature_names().begin(), feature_names().end());
  const auto [model, report] = stepwise_select(rows, y, order, 0.0);
  bool all_improved = true;
  for (std::size_t k = 1; k < report.steps.size(); ++k)
    all_improved = all_improved &&
                   report.steps[k].adjusted_r2 > report.steps[k - 1].adjusted_r2;
  REQUIRE(all_improved);  // construction guarantees monotone gains
  CHECK(report.chosen_k == kFeatureCount);
}
