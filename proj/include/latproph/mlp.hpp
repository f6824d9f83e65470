#pragma once

#include <cstdint>
#include <vector>

#include "latproph/features.hpp"

namespace latproph {

enum class MlpActivation { kRelu, kTanh, kSigmoid };

std::string_view to_string(MlpActivation a);
MlpActivation mlp_activation_from_string(const std::string& s);

struct MlpConfig {
  std::vector<int> hidden_layers{32};
  MlpActivation activation = MlpActivation::kRelu;
  double learning_rate = 1e-3;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double momentum = 0.9;  // in [0, 1)
};

// Fully connected net: input -> hidden layers (activation) -> 1 linear
// output. weights[l] is (fan_in x fan_out) row-major.
struct MlpModel {
  MlpConfig config;
  std::vector<int> layer_dims;  // input, hidden..., 1
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  bool expects_standardized_inputs = true;

  std::size_t layer_count() const { return weights.size(); }
};

// Every layer's pre-activation and post-activation values; post[0] is the
// input row itself.
struct MlpForwardCache {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> post;
};

struct MlpGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
};

struct MlpLossCurve {
  std::vector<double> train;  // mean batch MSE per epoch
  std::vector<double> valid;  // empty when no holdout was given
};

// Weights ~ U(-sqrt(3)/sqrt(fan_in), +sqrt(3)/sqrt(fan_in)) from the seeded
// generator, biases zero. Identical seed gives a bit-identical model.
MlpModel init_mlp(const MlpConfig& cfg, int input_dim = kFeatureCount);

double mlp_forward(const MlpModel& m, const std::vector<double>& x,
                   MlpForwardCache* cache = nullptr);

// Mean-squared-error gradients over the batch (mean reduction), via
// backprop. Matches central finite differences to < 1e-4 relative error.
MlpGradients mlp_gradients(const MlpModel& m, const std::vector<std::vector<double>>& X,
                           const std::vector<double>& y);

// Mini-batch SGD with momentum on MSE; batches from seeded shuffling per
// epoch; summation order fixed. Throws DivergenceError (naming the epoch)
// when the loss leaves the finite range.
MlpModel train_mlp(const MlpConfig& cfg, const std::vector<std::vector<double>>& X,
                   const std::vector<double>& y, MlpLossCurve* curve = nullptr,
                   const std::vector<std::vector<double>>* X_valid = nullptr,
                   const std::vector<double>* y_valid = nullptr);

}  // namespace latproph
