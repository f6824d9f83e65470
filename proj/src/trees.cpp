#include "latproph/trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "latproph/errors.hpp"
#include "latproph/features.hpp"
#include "latproph/rng.hpp"

namespace latproph {

namespace {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

struct TreeBuilder {
  const std::vector<std::vector<double>>& X;
  const std::vector<double>& y;
  int max_depth;
  int min_samples_split;
  int min_samples_leaf;
  double leaf_lambda;
  const std::vector<int>* fixed_subset;  // nullptr: all features
  Rng* subset_rng;                       // non-null: fresh subset per split
  int max_features = 0;

  RegressionTree tree;
  std::vector<std::size_t> feature_uses;

  int build(std::vector<std::size_t>& samples, int depth) {
    const std::size_t node_index = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.depth = std::max(tree.depth, depth);

    double sum = 0.0;
    bool constant = true;
    for (const std::size_t s : samples) {
      sum += y[s];
      if (y[s] != y[samples.front()]) constant = false;
    }
    const double count = static_cast<double>(samples.size());
    tree.nodes[node_index].value = sum / (count + leaf_lambda);

    if (constant || depth >= max_depth ||
        samples.size() < static_cast<std::size_t>(min_samples_split))
      return static_cast<int>(node_index);

    const SplitChoice split = best_split(samples);
    if (!split.found) return static_cast<int>(node_index);

    std::vector<std::size_t> left, right;
    left.reserve(samples.size());
    right.reserve(samples.size());
    for (const std::size_t s : samples) {
      if (X[s][static_cast<std::size_t>(split.feature)] <= split.threshold)
        left.push_back(s);
      else
        right.push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    feature_uses[static_cast<std::size_t>(split.feature)] += 1;
    const int left_index = build(left, depth + 1);
    const int right_index = build(right, depth + 1);
    TreeNode& node = tree.nodes[node_index];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_index;
    node.right = right_index;
    return static_cast<int>(node_index);
  }

  SplitChoice best_split(const std::vector<std::size_t>& samples) {
    std::vector<int> candidates;
    if (subset_rng != nullptr) {
      // fresh random subset of max_features distinct features, kept sorted so
      // the tie-break stays "lowest feature index"
      const int total = static_cast<int>(X[0].size());
      std::vector<int> all(static_cast<std::size_t>(total));
      std::iota(all.begin(), all.end(), 0);
      subset_rng->shuffle(all);
      candidates.assign(all.begin(), all.begin() + std::min(total, max_features));
      std::sort(candidates.begin(), candidates.end());
    } else if (fixed_subset != nullptr && !fixed_subset->empty()) {
      candidates = *fixed_subset;
      std::sort(candidates.begin(), candidates.end());
    } else {
      candidates.resize(X[0].size());
      std::iota(candidates.begin(), candidates.end(), 0);
    }

    double parent_sum = 0.0;
    double parent_sumsq = 0.0;
    for (const std::size_t s : samples) {
      parent_sum += y[s];
      parent_sumsq += y[s] * y[s];
    }
    const double n = static_cast<double>(samples.size());
    const double parent_sse = parent_sumsq - parent_sum * parent_sum / n;

    SplitChoice best;
    std::vector<std::pair<double, double>> column(samples.size());  // (value, target)
    for (const int feature : candidates) {
      for (std::size_t k = 0; k < samples.size(); ++k) {
        const std::size_t s = samples[k];
        column[k] = {X[s][static_cast<std::size_t>(feature)], y[s]};
      }
      std::sort(column.begin(), column.end());

      double left_sum = 0.0;
      double left_sumsq = 0.0;
      for (std::size_t k = 0; k + 1 < column.size(); ++k) {
        left_sum += column[k].second;
        left_sumsq += column[k].second * column[k].second;
        if (column[k].first == column[k + 1].first) continue;  // not a boundary
        const double left_n = static_cast<double>(k + 1);
        const double right_n = n - left_n;
        if (left_n < min_samples_leaf || right_n < min_samples_leaf) continue;
        const double right_sum = parent_sum - left_sum;
        const double right_sumsq = parent_sumsq - left_sumsq;
        const double sse = (left_sumsq - left_sum * left_sum / left_n) +
                           (right_sumsq - right_sum * right_sum / right_n);
        const double gain = parent_sse - sse;
        if (gain <= 0.0) continue;
        if (!best.found || gain > best.gain) {
          best.found = true;
          best.gain = gain;
          best.feature = feature;
          best.threshold = (column[k].first + column[k + 1].first) / 2.0;
        }
      }
    }
    return best;
  }
};

RegressionTree fit_tree_impl(const std::vector<std::vector<double>>& X,
                             const std::vector<double>& y, const TreeFitParams& params,
                             double leaf_lambda, Rng* subset_rng, int max_features,
                             std::vector<std::size_t>* feature_uses,
                             const std::vector<std::size_t>* sample_subset) {
  if (X.empty()) throw DimensionError("fit_tree: empty sample set");
  if (X.size() != y.size()) throw DimensionError("fit_tree: |X| != |y|");

  TreeBuilder builder{X,
                      y,
                      params.max_depth,
                      params.min_samples_split,
                      params.min_samples_leaf,
                      leaf_lambda,
                      params.feature_subset.empty() ? nullptr : &params.feature_subset,
                      subset_rng,
                      max_features,
                      {},
                      {}};
  builder.feature_uses.assign(X[0].size(), 0);

  std::vector<std::size_t> samples;
  if (sample_subset != nullptr) {
    samples = *sample_subset;
  } else {
    samples.resize(X.size());
    std::iota(samples.begin(), samples.end(), std::size_t{0});
  }
  builder.build(samples, 0);
  if (feature_uses != nullptr) *feature_uses = std::move(builder.feature_uses);
  return std::move(builder.tree);
}

}  // namespace

RegressionTree fit_tree(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                        const TreeFitParams& params) {
  return fit_tree_impl(X, y, params, 0.0, nullptr, 0, nullptr, nullptr);
}

RfModel fit_rf(const RfConfig& cfg, const std::vector<std::vector<double>>& X,
               const std::vector<double>& y) {
  if (cfg.n_estimators < 1) throw ConfigError("fit_rf: n_estimators must be >= 1");
  if (cfg.max_features < 1) throw ConfigError("fit_rf: max_features must be >= 1");
  if (cfg.min_samples_leaf < 1) throw ConfigError("fit_rf: min_samples_leaf must be >= 1");
  if (cfg.min_samples_split < 2 * cfg.min_samples_leaf)
    throw ConfigError("fit_rf: min_samples_split must be >= 2 * min_samples_leaf");
  if (X.size() < 2) throw ConfigError("fit_rf: need at least 2 samples");
  if (X.size() != y.size()) throw DimensionError("fit_rf: |X| != |y|");

  RfModel model;
  model.n_features = X[0].size();
  TreeFitParams params;
  params.max_depth = cfg.max_depth;
  params.min_samples_split = cfg.min_samples_split;
  params.min_samples_leaf = cfg.min_samples_leaf;

  const bool subsets = cfg.max_features < static_cast<int>(model.n_features);
  for (int t = 0; t < cfg.n_estimators; ++t) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> samples(X.size());
    if (cfg.bootstrap) {
      for (auto& s : samples)
        s = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(X.size())));
      std::sort(samples.begin(), samples.end());
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    std::vector<std::size_t> uses;
    model.trees.push_back(fit_tree_impl(X, y, params, 0.0, subsets ? &rng : nullptr,
                                        cfg.max_features, &uses, &samples));
    model.feature_use_counts.push_back(std::move(uses));
  }
  return model;
}

GbtModel fit_gbt(const GbtConfig& cfg, const std::vector<std::vector<double>>& X,
                 const std::vector<double>& y,
                 const std::vector<std::vector<double>>* X_valid,
                 const std::vector<double>* y_valid) {
  if (cfg.n_rounds < 1) throw ConfigError("fit_gbt: n_rounds must be >= 1");
  if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0))
    throw ConfigError("fit_gbt: learning_rate must be in (0, 1]");
  if (cfg.max_depth < 0) throw ConfigError("fit_gbt: max_depth must be >= 0");
  if (cfg.min_samples_leaf < 1) throw ConfigError("fit_gbt: min_samples_leaf must be >= 1");
  if (cfg.lambda_reg < 0.0) throw ConfigError("fit_gbt: lambda_reg must be >= 0");
  if (!(cfg.subsample > 0.0 && cfg.subsample <= 1.0))
    throw ConfigError("fit_gbt: subsample must be in (0, 1]");
  if (cfg.early_stopping_rounds < 0) throw ConfigError("fit_gbt: early_stopping_rounds must be >= 0");
  if (X.size() < 2) throw ConfigError("fit_gbt: need at least 2 samples");
  if (X.size() != y.size()) throw DimensionError("fit_gbt: |X| != |y|");
  const bool has_valid = X_valid != nullptr && y_valid != nullptr && !X_valid->empty();
  if (cfg.early_stopping_rounds > 0 && !has_valid)
    throw EarlyStopWithoutValidError("fit_gbt: early stopping requires a validation set");

  GbtModel model;
  model.n_features = X[0].size();
  model.learning_rate = cfg.learning_rate;
  model.base_prediction = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  TreeFitParams params;
  params.max_depth = cfg.max_depth;
  params.min_samples_split = std::max(2, 2 * cfg.min_samples_leaf);
  params.min_samples_leaf = cfg.min_samples_leaf;

  std::vector<double> train_pred(X.size(), model.base_prediction);
  std::vector<double> valid_pred(has_valid ? X_valid->size() : 0, model.base_prediction);
  std::vector<double> residuals(X.size());

  Rng subsample_rng(mix_seed(cfg.seed, 0));
  std::vector<std::size_t> all_rows(X.size());
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

  double best_valid = std::numeric_limits<double>::infinity();
  std::size_t best_round = 0;  // number of trees in the best prefix
  int rounds_since_best = 0;

  for (int round = 0; round < cfg.n_rounds; ++round) {
    for (std::size_t i = 0; i < X.size(); ++i) residuals[i] = y[i] - train_pred[i];

    const std::vector<std::size_t>* rows = &all_rows;
    std::vector<std::size_t> sampled;
    if (cfg.subsample < 1.0) {
      const auto keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(cfg.subsample * static_cast<double>(X.size()))));
      std::vector<std::size_t> pool(all_rows);
      subsample_rng.shuffle(pool);
      sampled.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep));
      std::sort(sampled.begin(), sampled.end());
      rows = &sampled;
    }

    std::vector<std::size_t> uses;
    RegressionTree tree =
        fit_tree_impl(X, residuals, params, cfg.lambda_reg, nullptr, 0, &uses, rows);

    for (std::size_t i = 0; i < X.size(); ++i)
      train_pred[i] += cfg.learning_rate * tree.predict(X[i]);
    if (has_valid)
      for (std::size_t i = 0; i < X_valid->size(); ++i)
        valid_pred[i] += cfg.learning_rate * tree.predict((*X_valid)[i]);

    model.trees.push_back(std::move(tree));
    model.feature_use_counts.push_back(std::move(uses));

    double train_mse = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i)
      train_mse += (y[i] - train_pred[i]) * (y[i] - train_pred[i]);
    model.train_loss.push_back(train_mse / static_cast<double>(X.size()));

    if (has_valid) {
      double valid_mse = 0.0;
      for (std::size_t i = 0; i < X_valid->size(); ++i)
        valid_mse += ((*y_valid)[i] - valid_pred[i]) * ((*y_valid)[i] - valid_pred[i]);
      valid_mse /= static_cast<double>(X_valid->size());
      model.valid_loss.push_back(valid_mse);

      if (valid_mse < best_valid) {
        best_valid = valid_mse;
        best_round = model.trees.size();
        rounds_since_best = 0;
      } else if (cfg.early_stopping_rounds > 0) {
        ++rounds_since_best;
        if (rounds_since_best >= cfg.early_stopping_rounds) break;
      }
    }
  }

  if (cfg.early_stopping_rounds > 0 && best_round < model.trees.size()) {
    model.trees.resize(best_round);
    model.feature_use_counts.resize(best_round);
  }
  return model;
}

double predict_rf(const RfModel& m, const std::vector<double>& x) {
  double sum = 0.0;
  for (const auto& tree : m.trees) sum += tree.predict(x);
  const double pred = sum / static_cast<double>(m.trees.size());
  return m.log_target ? std::exp(pred) : pred;
}

double predict_gbt(const GbtModel& m, const std::vector<double>& x) {
  double pred = m.base_prediction;
  for (const auto& tree : m.trees) pred += m.learning_rate * tree.predict(x);
  return m.log_target ? std::exp(pred) : pred;
}

std::map<std::string, double> feature_importance(const GbtModel& m) {
  std::map<std::string, double> scores;
  for (std::size_t f = 0; f < m.n_features; ++f) {
    const std::string name = m.n_features == kFeatureCount
                                 ? feature_names()[f]
                                 : "x" + std::to_string(f);
    double total = 0.0;
    for (const auto& uses : m.feature_use_counts) total += static_cast<double>(uses[f]);
    scores[name] = total;
  }
  return scores;
}

}  // namespace latproph
