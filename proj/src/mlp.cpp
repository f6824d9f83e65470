#include "latproph/mlp.hpp"

#include <cmath>
#include <numeric>

#include "latproph/errors.hpp"
#include "latproph/rng.hpp"

namespace latproph {

std::string_view to_string(MlpActivation a) {
  switch (a) {
    case MlpActivation::kRelu: return "relu";
    case MlpActivation::kTanh: return "tanh";
    case MlpActivation::kSigmoid: return "sigmoid";
  }
  return "?";
}

MlpActivation mlp_activation_from_string(const std::string& s) {
  if (s == "relu") return MlpActivation::kRelu;
  if (s == "tanh") return MlpActivation::kTanh;
  if (s == "sigmoid") return MlpActivation::kSigmoid;
  throw ConfigError("unknown MLP activation '" + s + "'");
}

namespace {

double activate(MlpActivation a, double v) {
  switch (a) {
    case MlpActivation::kRelu: return v > 0.0 ? v : 0.0;
    case MlpActivation::kTanh: return std::tanh(v);
    case MlpActivation::kSigmoid: return 1.0 / (1.0 + std::exp(-v));
  }
  return v;
}

// derivative as a function of the pre-activation value
double activate_grad(MlpActivation a, double v) {
  switch (a) {
    case MlpActivation::kRelu: return v > 0.0 ? 1.0 : 0.0;
    case MlpActivation::kTanh: {
      const double t = std::tanh(v);
      return 1.0 - t * t;
    }
    case MlpActivation::kSigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-v));
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

void validate_config(const MlpConfig& cfg) {
  if (cfg.hidden_layers.empty()) throw ConfigError("MLP needs at least one hidden layer");
  for (const int width : cfg.hidden_layers)
    if (width < 1) throw ConfigError("MLP hidden layer width must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("MLP learning_rate must be > 0");
  if (cfg.epochs < 1) throw ConfigError("MLP epochs must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("MLP batch_size must be >= 1");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
    throw ConfigError("MLP momentum must be in [0, 1)");
}

double mse(const MlpModel& m, const std::vector<std::vector<double>>& X,
           const std::vector<double>& y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    const double d = mlp_forward(m, X[i]) - y[i];
    sum += d * d;
  }
  return sum / static_cast<double>(X.size());
}

}  // namespace

MlpModel init_mlp(const MlpConfig& cfg, int input_dim) {
  validate_config(cfg);
  if (input_dim < 1) throw ConfigError("MLP input dimension must be >= 1");

  MlpModel m;
  m.config = cfg;
  m.layer_dims.push_back(input_dim);
  for (const int width : cfg.hidden_layers) m.layer_dims.push_back(width);
  m.layer_dims.push_back(1);

  Rng rng(mix_seed(cfg.seed, 0));
  for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
    const int fan_in = m.layer_dims[l];
    const int fan_out = m.layer_dims[l + 1];
    const double bound = std::sqrt(3.0) / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> w(static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out));
    for (auto& v : w) v = rng.uniform(-bound, bound);
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(static_cast<std::size_t>(fan_out), 0.0);
  }
  return m;
}

double mlp_forward(const MlpModel& m, const std::vector<double>& x, MlpForwardCache* cache) {
  if (x.size() != static_cast<std::size_t>(m.layer_dims.front()))
    throw DimensionError("mlp_forward: input has " + std::to_string(x.size()) +
                         " entries, model expects " + std::to_string(m.layer_dims.front()));
  if (cache) {
    cache->pre.assign(m.layer_count(), {});
    cache->post.assign(m.layer_count() + 1, {});
    cache->post[0] = x;
  }

  std::vector<double> cur = x;
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const int fan_in = m.layer_dims[l];
    const int fan_out = m.layer_dims[l + 1];
    std::vector<double> pre(m.biases[l]);
    for (int i = 0; i < fan_in; ++i) {
      const double xi = cur[static_cast<std::size_t>(i)];
      const double* row = &m.weights[l][static_cast<std::size_t>(i) * static_cast<std::size_t>(fan_out)];
      for (int j = 0; j < fan_out; ++j) pre[static_cast<std::size_t>(j)] += xi * row[j];
    }
    const bool output_layer = l + 1 == m.layer_count();
    std::vector<double> post(pre.size());
    for (std::size_t j = 0; j < pre.size(); ++j)
      post[j] = output_layer ? pre[j] : activate(m.config.activation, pre[j]);
    if (cache) {
      cache->pre[l] = pre;
      cache->post[l + 1] = post;
    }
    cur = std::move(post);
  }
  return cur[0];
}

MlpGradients mlp_gradients(const MlpModel& m, const std::vector<std::vector<double>>& X,
                           const std::vector<double>& y) {
  if (X.size() != y.size()) throw DimensionError("mlp_gradients: |X| != |y|");
  MlpGradients g;
  g.weights.reserve(m.layer_count());
  g.biases.reserve(m.layer_count());
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    g.weights.emplace_back(m.weights[l].size(), 0.0);
    g.biases.emplace_back(m.biases[l].size(), 0.0);
  }

  MlpForwardCache cache;
  const double inv_n = 1.0 / static_cast<double>(X.size());
  for (std::size_t s = 0; s < X.size(); ++s) {
    const double pred = mlp_forward(m, X[s], &cache);
    // d(MSE)/d(pred), mean reduction
    std::vector<double> delta{2.0 * (pred - y[s]) * inv_n};

    for (std::size_t l = m.layer_count(); l-- > 0;) {
      const int fan_in = m.layer_dims[l];
      const int fan_out = m.layer_dims[l + 1];
      const auto& input = cache.post[l];
      for (int j = 0; j < fan_out; ++j) {
        g.biases[l][static_cast<std::size_t>(j)] += delta[static_cast<std::size_t>(j)];
        for (int i = 0; i < fan_in; ++i)
          g.weights[l][static_cast<std::size_t>(i) * static_cast<std::size_t>(fan_out) +
                       static_cast<std::size_t>(j)] +=
              delta[static_cast<std::size_t>(j)] * input[static_cast<std::size_t>(i)];
      }
      if (l == 0) break;
      std::vector<double> prev_delta(static_cast<std::size_t>(fan_in), 0.0);
      for (int i = 0; i < fan_in; ++i) {
        double sum = 0.0;
        const double* row = &m.weights[l][static_cast<std::size_t>(i) * static_cast<std::size_t>(fan_out)];
        for (int j = 0; j < fan_out; ++j) sum += row[j] * delta[static_cast<std::size_t>(j)];
        prev_delta[static_cast<std::size_t>(i)] =
            sum * activate_grad(m.config.activation, cache.pre[l - 1][static_cast<std::size_t>(i)]);
      }
      delta = std::move(prev_delta);
    }
  }
  return g;
}

MlpModel train_mlp(const MlpConfig& cfg, const std::vector<std::vector<double>>& X,
                   const std::vector<double>& y, MlpLossCurve* curve,
                   const std::vector<std::vector<double>>* X_valid,
                   const std::vector<double>* y_valid) {
  validate_config(cfg);
  if (X.size() != y.size()) throw DimensionError("train_mlp: |X| != |y|");
  if (X.size() < static_cast<std::size_t>(cfg.batch_size))
    throw ConfigError("train_mlp: need at least batch_size rows");

  MlpModel m = init_mlp(cfg, static_cast<int>(X[0].size()));
  std::vector<std::vector<double>> vel_w, vel_b;
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    vel_w.emplace_back(m.weights[l].size(), 0.0);
    vel_b.emplace_back(m.biases[l].size(), 0.0);
  }

  Rng shuffle_rng(mix_seed(cfg.seed, 1));
  std::vector<std::size_t> order(X.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<std::vector<double>> batch_x;
  std::vector<double> batch_y;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch_x.clear();
      batch_y.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch_x.push_back(X[order[i]]);
        batch_y.push_back(y[order[i]]);
      }

      // batch loss at the current parameters, then one SGD+momentum step
      double loss = 0.0;
      for (std::size_t i = 0; i < batch_x.size(); ++i) {
        const double d = mlp_forward(m, batch_x[i]) - batch_y[i];
        loss += d * d;
      }
      loss /= static_cast<double>(batch_x.size());
      epoch_loss += loss;
      ++batches;

      const MlpGradients g = mlp_gradients(m, batch_x, batch_y);
      for (std::size_t l = 0; l < m.layer_count(); ++l) {
        for (std::size_t k = 0; k < m.weights[l].size(); ++k) {
          vel_w[l][k] = cfg.momentum * vel_w[l][k] - cfg.learning_rate * g.weights[l][k];
          m.weights[l][k] += vel_w[l][k];
        }
        for (std::size_t k = 0; k < m.biases[l].size(); ++k) {
          vel_b[l][k] = cfg.momentum * vel_b[l][k] - cfg.learning_rate * g.biases[l][k];
          m.biases[l][k] += vel_b[l][k];
        }
      }
    }
    epoch_loss /= static_cast<double>(batches);
    if (!std::isfinite(epoch_loss))
      throw DivergenceError("train_mlp: training loss diverged at epoch " + std::to_string(epoch));
    if (curve) {
      curve->train.push_back(epoch_loss);
      if (X_valid && y_valid) curve->valid.push_back(mse(m, *X_valid, *y_valid));
    }
  }
  return m;
}

}  // namespace latproph
