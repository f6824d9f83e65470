#pragma once

#include <optional>
#include <string>
#include <variant>

#include "latproph/common.hpp"
#include "latproph/dataset.hpp"
#include "latproph/features.hpp"
#include "latproph/mlp.hpp"
#include "latproph/ols.hpp"
#include "latproph/svr.hpp"
#include "latproph/trees.hpp"

namespace latproph {

enum class ModelKind { kOls, kMlp, kSvr, kRf, kGbt };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct OlsTrainConfig {
  double stop_delta = kDefaultStepwiseStopDelta;
  // Stepwise insertion order; empty means the canonical (importance) order.
  std::vector<std::string> order;
};

// One training recipe: the model family plus its hyperparameters. Only the
// member matching `kind` is consulted.
struct PredictorConfig {
  ModelKind kind = ModelKind::kGbt;
  OlsTrainConfig ols{};
  MlpConfig mlp{};
  SvrConfig svr{};
  RfConfig rf{};
  GbtConfig gbt{};
};

struct PredictorMetadata {
  std::string device;
  std::string train_fingerprint;
  std::string created_at;
  std::string toolkit_version{kToolkitVersion};
};

// A fitted model with everything prediction needs: the optional input
// standardizer, the feature transform and the log-target flag travel with
// the payload, so predict() accepts raw feature vectors and returns
// milliseconds.
struct TrainedPredictor {
  ModelKind kind = ModelKind::kGbt;
  std::variant<OlsModel, MlpModel, SvrModel, RfModel, GbtModel> payload;
  std::optional<Standardizer> standardizer;
  // MLP/SVR recipes compress features with log1p before standardizing;
  // feature values span 10 orders of magnitude and neither kernel distances
  // nor gradient descent survive that raw
  bool log1p_features = false;
  bool log_target = false;
  PredictorMetadata metadata;

  double predict(const FeatureVector& x) const;
};

// Fits one predictor on raw features and raw latencies, applying the
// per-family conventions: OLS consumes raw features and raw targets via
// stepwise selection; MLP/SVR standardize inputs; MLP/SVR/RF/GBT fit
// log-latency. A GBT recipe with early stopping carves a seeded 15%
// validation slice out of the training rows.
TrainedPredictor train_predictor(const PredictorConfig& cfg,
                                 const std::vector<FeatureVector>& X,
                                 const std::vector<double>& y,
                                 const std::string& device = "");

// Versioned self-describing container (magic line, JSON payload, fnv1a64
// checksum). Round-trip reproduces predictions bit-exactly.
void save_predictor(const TrainedPredictor& p, const std::string& path);
TrainedPredictor load_predictor(const std::string& path);

std::string predictor_to_container(const TrainedPredictor& p);
TrainedPredictor predictor_from_container(const std::string& text);

// config <-> JSON for the CLI `train --config` path and for grid rows
std::string predictor_config_to_json(const PredictorConfig& cfg);
PredictorConfig predictor_config_from_json(const std::string& text);

}  // namespace latproph
