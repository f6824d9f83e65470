#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace latproph {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

// Flat-array CART regression tree; node 0 is the root.
struct RegressionTree {
  std::vector<TreeNode> nodes;
  int depth = 0;

  double predict(const std::vector<double>& x) const {
    int idx = 0;
    while (nodes[static_cast<std::size_t>(idx)].feature >= 0) {
      const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
      idx = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(idx)].value;
  }

  std::size_t internal_node_count() const {
    std::size_t count = 0;
    for (const auto& node : nodes) count += node.feature >= 0 ? 1 : 0;
    return count;
  }
};

struct TreeFitParams {
  int max_depth = std::numeric_limits<int>::max();  // number of split levels
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  std::vector<int> feature_subset;  // empty means all features
};

struct RfConfig {
  int n_estimators = 100;
  int max_depth = std::numeric_limits<int>::max();
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  int max_features = 11;
  std::uint64_t seed = 0;
  bool bootstrap = true;
};

struct GbtConfig {
  int n_rounds = 100;
  double learning_rate = 0.1;  // (0, 1]
  int max_depth = 3;
  int min_samples_leaf = 1;
  double lambda_reg = 0.0;  // leaf value = sum(residuals) / (count + lambda)
  double subsample = 1.0;   // row fraction per round, (0, 1]
  int early_stopping_rounds = 0;  // 0 = off; > 0 requires a validation set
  std::uint64_t seed = 0;
};

struct RfModel {
  std::vector<RegressionTree> trees;
  std::vector<std::vector<std::size_t>> feature_use_counts;  // per tree
  std::size_t n_features = 0;
  bool log_target = false;
};

struct GbtModel {
  double base_prediction = 0.0;  // mean of training targets
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  std::vector<std::vector<std::size_t>> feature_use_counts;  // per tree
  std::size_t n_features = 0;
  bool log_target = false;
  std::vector<double> train_loss;  // per-round MSE
  std::vector<double> valid_loss;  // empty without a validation set
};

// Greedy top-down CART: candidate thresholds are midpoints of consecutive
// sorted unique feature values, gain is SSE reduction, ties break to the
// lower feature index then lower threshold; leaves predict the mean target.
RegressionTree fit_tree(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                        const TreeFitParams& params);

// Bagged forest: per-tree seeded bootstrap resample plus a fresh random
// feature subset of size max_features at every split. Tree t draws from an
// RNG stream keyed by (seed, t), so fits are schedule-independent.
RfModel fit_rf(const RfConfig& cfg, const std::vector<std::vector<double>>& X,
               const std::vector<double>& y);

// Gradient boosting under squared loss: each round fits a tree to the
// current residuals (the negative gradient), with leaf shrinkage lambda_reg
// and optional row subsampling; early stopping keeps the prefix with the
// best validation MSE.
GbtModel fit_gbt(const GbtConfig& cfg, const std::vector<std::vector<double>>& X,
                 const std::vector<double>& y,
                 const std::vector<std::vector<double>>* X_valid = nullptr,
                 const std::vector<double>* y_valid = nullptr);

double predict_rf(const RfModel& m, const std::vector<double>& x);
double predict_gbt(const GbtModel& m, const std::vector<double>& x);

// F-score: number of internal nodes splitting on each feature, summed over
// the ensemble. Keys are the canonical feature names when the model was fit
// on 11 features, otherwise x0..x{n-1}.
std::map<std::string, double> feature_importance(const GbtModel& m);

}  // namespace latproph
