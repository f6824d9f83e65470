#include <cmath>

#include "doctest.h"
#include "latproph/errors.hpp"
#include "latproph/mlp.hpp"
#include "latproph/rng.hpp"

using namespace latproph;

namespace {

// central finite differences over every parameter; the independent oracle
// for the analytic backprop gradients
MlpGradients numeric_gradients(MlpModel model, const std::vector<std::vector<double>>& X,
                               const std::vector<double>& y, double h = 1e-5) {
  auto loss = [&X, &y](const MlpModel& m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
      const double d = mlp_forward(m, X[i]) - y[i];
      sum += d * d;
    }
    return sum / static_cast<double>(X.size());
  };

  MlpGradients g;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    g.weights.emplace_back(model.weights[l].size(), 0.0);
    g.biases.emplace_back(model.biases[l].size(), 0.0);
    for (std::size_t k = 0; k < model.weights[l].size(); ++k) {
      const double orig = model.weights[l][k];
      model.weights[l][k] = orig + h;
      const double up = loss(model);
      model.weights[l][k] = orig - h;
      const double down = loss(model);
      model.weights[l][k] = orig;
      g.weights[l][k] = (up - down) / (2.0 * h);
    }
    for (std::size_t k = 0; k < model.biases[l].size(); ++k) {
      const double orig = model.biases[l][k];
      model.biases[l][k] = orig + h;
      const double up = loss(model);
      model.biases[l][k] = orig - h;
      const double down = loss(model);
      model.biases[l][k] = orig;
      g.biases[l][k] = (up - down) / (2.0 * h);
    }
  }
  return g;
}

double max_relative_error(const MlpGradients& a, const MlpGradients& b) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    for (std::size_t k = 0; k < a.weights[l].size(); ++k) {
      const double denom = std::max({std::abs(a.weights[l][k]), std::abs(b.weights[l][k]), 1e-8});
      worst = std::max(worst, std::abs(a.weights[l][k] - b.weights[l][k]) / denom);
    }
    for (std::size_t k = 0; k < a.biases[l].size(); ++k) {
      const double denom = std::max({std::abs(a.biases[l][k]), std::abs(b.biases[l][k]), 1e-8});
      worst = std::max(worst, std::abs(a.biases[l][k] - b.biases[l][k]) / denom);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("init is deterministic and shaped correctly") {
  MlpConfig cfg;
  cfg.hidden_layers = {4};
  cfg.seed = 7;
  const MlpModel a = init_mlp(cfg);
  const MlpModel b = init_mlp(cfg);
  CHECK(a.weights == b.weights);
  CHECK(a.biases == b.biases);
  CHECK(a.weights[0].size() == 11 * 4);
  CHECK(a.weights[1].size() == 4 * 1);
  CHECK(a.biases[0].size() == 4);
  CHECK(a.biases[1].size() == 1);
  for (const auto& bias : a.biases)
    for (const double v : bias) CHECK(v == 0.0);
}

TEST_CASE("initial weights respect the 1/sqrt(fan_in) uniform bound") {
  MlpConfig cfg;
  cfg.hidden_layers = {50};
  cfg.seed = 3;
  const MlpModel m = init_mlp(cfg, 100);
  const double bound = 0.1 * std::sqrt(3.0);  // fan_in 100
  bool nonzero = false;
  for (const double w : m.weights[0]) {
    CHECK(std::abs(w) <= bound);
    nonzero = nonzero || w != 0.0;
  }
  CHECK(nonzero);
}

TEST_CASE("forward: zero weights pass the output bias through") {
  MlpConfig cfg;
  cfg.hidden_layers = {3};
  MlpModel m = init_mlp(cfg);
  for (auto& layer : m.weights)
    for (auto& w : layer) w = 0.0;
  m.biases[1][0] = 5.0;
  CHECK(mlp_forward(m, std::vector<double>(11, 1.0)) == 5.0);
}

TEST_CASE("forward: dead relu neuron leaves only the output bias") {
  MlpConfig cfg;
  cfg.hidden_layers = {1};
  cfg.activation = MlpActivation::kRelu;
  MlpModel m = init_mlp(cfg);
  for (auto& w : m.weights[0]) w = 1.0;
  m.biases[0][0] = -1000.0;  // pre-activation far below zero
  for (auto& w : m.weights[1]) w = 2.0;
  m.biases[1][0] = 1.25;
  CHECK(mlp_forward(m, std::vector<double>(11, 1.0)) == 1.25);
}

TEST_CASE("hand-built 2-2-1 tanh net matches paper arithmetic") {
  MlpConfig cfg;
  cfg.hidden_layers = {2};
  cfg.activation = MlpActivation::kTanh;
  MlpModel m = init_mlp(cfg, 2);
  // weights[0]: (2x2) row-major [w_x0h0, w_x0h1, w_x1h0, w_x1h1]
  m.weights[0] = {0.5, -0.3, 0.2, 0.8};
  m.biases[0] = {0.1, -0.2};
  m.weights[1] = {1.5, -2.0};
  m.biases[1] = {0.25};
  const double x0 = 0.3;
  const double x1 = -0.7;
  const double h0 = std::tanh(0.5 * x0 + 0.2 * x1 + 0.1);
  const double h1 = std::tanh(-0.3 * x0 + 0.8 * x1 - 0.2);
  const double expected = 1.5 * h0 - 2.0 * h1 + 0.25;
  CHECK(mlp_forward(m, {x0, x1}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("forward is pure: repeated calls agree bitwise") {
  MlpConfig cfg;
  cfg.hidden_layers = {8, 4};
  cfg.seed = 12;
  const MlpModel m = init_mlp(cfg);
  const std::vector<double> x(11, 0.37);
  const double first = mlp_forward(m, x);
  for (int i = 0; i < 10; ++i) CHECK(mlp_forward(m, x) == first);
}

TEST_CASE("gradient check across activations on 2-hidden-layer nets") {
  Rng rng(2024);
  for (const MlpActivation act :
       {MlpActivation::kTanh, MlpActivation::kSigmoid, MlpActivation::kRelu}) {
    for (int trial = 0; trial < 5; ++trial) {
      MlpConfig cfg;
      cfg.hidden_layers = {6, 4};
      cfg.activation = act;
      cfg.seed = static_cast<std::uint64_t>(100 + trial);
      MlpModel m = init_mlp(cfg);

      std::vector<std::vector<double>> X(4, std::vector<double>(11));
      std::vector<double> y(4);
      for (std::size_t i = 0; i < X.size(); ++i) {
        for (auto& v : X[i]) v = rng.uniform(-2.0, 2.0);
        y[i] = rng.uniform(-1.0, 1.0);
      }
      // relu is checked away from kinks: nudge any pre-activation near zero
      if (act == MlpActivation::kRelu) {
        MlpForwardCache cache;
        bool near_kink = false;
        for (const auto& x : X) {
          mlp_forward(m, x, &cache);
          for (const auto& layer : cache.pre)
            for (const double v : layer) near_kink = near_kink || std::abs(v) < 1e-3;
        }
        if (near_kink) continue;
      }

      const MlpGradients analytic = mlp_gradients(m, X, y);
      const MlpGradients numeric = numeric_gradients(m, X, y);
      CHECK(max_relative_error(analytic, numeric) < 1e-4);
    }
  }
}

TEST_CASE("training fits a linear target") {
  Rng rng(31);
  std::vector<std::vector<double>> X(64, std::vector<double>(11));
  std::vector<double> y(64);
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (auto& v : X[i]) v = rng.uniform(-1.0, 1.0);
    y[i] = X[i][0];
  }
  MlpConfig cfg;
  cfg.hidden_layers = {8};
  cfg.activation = MlpActivation::kTanh;
  cfg.learning_rate = 0.02;
  cfg.epochs = 500;
  cfg.batch_size = 16;
  cfg.seed = 5;
  MlpLossCurve curve;
  const MlpModel m = train_mlp(cfg, X, y, &curve);
  CHECK(curve.train.back() < 1e-3);
}

TEST_CASE("absurd learning rate diverges with the epoch in the message") {
  Rng rng(32);
  std::vector<std::vector<double>> X(32, std::vector<double>(11));
  std::vector<double> y(32);
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (auto& v : X[i]) v = rng.uniform(-1.0, 1.0);
    y[i] = rng.uniform(-1.0, 1.0);
  }
  MlpConfig cfg;
  cfg.hidden_layers = {8};
  cfg.learning_rate = 1e3;
  cfg.epochs = 50;
  cfg.batch_size = 8;
  CHECK_THROWS_WITH_AS(train_mlp(cfg, X, y), doctest::Contains("epoch"), DivergenceError);
}

TEST_CASE("same seed, same loss curve") {
  Rng rng(33);
  std::vector<std::vector<double>> X(48, std::vector<double>(11));
  std::vector<double> y(48);
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (auto& v : X[i]) v = rng.uniform(-1.0, 1.0);
    y[i] = X[i][2] - X[i][5];
  }
  MlpConfig cfg;
  cfg.hidden_layers = {6};
  cfg.epochs = 40;
  cfg.batch_size = 16;
  cfg.seed = 99;
  MlpLossCurve c1, c2;
  train_mlp(cfg, X, y, &c1);
  train_mlp(cfg, X, y, &c2);
  CHECK(c1.train == c2.train);
}

TEST_CASE("loss is non-increasing on noiseless linear data at small rates") {
  Rng rng(34);
  std::vector<std::vector<double>> X(64, std::vector<double>(11));
  std::vector<double> y(64);
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (auto& v : X[i]) v = rng.uniform(-1.0, 1.0);
    y[i] = 0.5 * X[i][0] - 0.25 * X[i][7];
  }
  MlpConfig cfg;
  cfg.hidden_layers = {8};
  cfg.activation = MlpActivation::kTanh;
  cfg.learning_rate = 1e-3;
  cfg.momentum = 0.0;
  cfg.epochs = 200;
  cfg.batch_size = 64;  // full batch keeps the descent clean
  cfg.seed = 44;
  MlpLossCurve curve;
  train_mlp(cfg, X, y, &curve);
  CHECK(curve.train.back() < curve.train.front());
  for (std::size_t e = 1; e < curve.train.size(); ++e)
    CHECK(curve.train[e] <= curve.train[e - 1] * 1.05);
}

TEST_CASE("config validation") {
  MlpConfig cfg;
  cfg.hidden_layers = {};
  CHECK_THROWS_AS(init_mlp(cfg), ConfigError);
  cfg.hidden_layers = {4};
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(init_mlp(cfg), ConfigError);
  cfg.learning_rate = 0.1;
  cfg.momentum = 1.0;
  CHECK_THROWS_AS(init_mlp(cfg), ConfigError);
}
