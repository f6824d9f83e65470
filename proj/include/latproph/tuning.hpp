#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "latproph/predictor.hpp"
#include "nlohmann/json.hpp"

namespace latproph {

// Exhaustive search space: axis name -> candidate values. Axis names are
// the model family's config keys (see docs/file_formats.md).
struct HyperGrid {
  ModelKind model_kind = ModelKind::kGbt;
  std::map<std::string, std::vector<nlohmann::json>> axes;
};

struct GridPoint {
  std::map<std::string, nlohmann::json> values;

  std::string compact_json() const;
};

struct CvConfigResult {
  std::size_t config_index = 0;
  std::string config_json;
  double mean_mape = 0.0;
  double std_mape = 0.0;
  std::vector<double> fold_mapes;
  bool failed = false;
  std::string error;
  double wall_time_s = 0.0;  // informational; excluded from the CSV so
                             // reports stay byte-reproducible
};

struct CvReport {
  ModelKind model_kind = ModelKind::kGbt;
  std::size_t fold_count = 0;
  std::size_t total_configs = 0;
  std::size_t best_config_index = 0;
  std::vector<CvConfigResult> per_config;
  double total_wall_time_s = 0.0;      // whole search including the refit
  double final_training_time_s = 0.0;  // refit of the winner alone
};

// Seeded shuffle then contiguous partition; fold sizes differ by at most 1.
// Throws ConfigError for k < 2 or k > n.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed);

// Cartesian product in lexicographic axis-name order; the first axis varies
// slowest.
std::vector<GridPoint> grid_expand(const HyperGrid& grid);

// Builds a training recipe from family defaults plus one grid point.
PredictorConfig config_from_grid_point(ModelKind kind, const GridPoint& point);

// For every configuration: train on k-1 folds, score validation MAPE on the
// held-out fold, average across folds; the winner (minimal mean, ties to
// the first in enumeration order) is refit on the full training set.
// Per-config RNG seeds derive from (seed, config index), so results are
// identical whatever the worker count. Failed configs are recorded and
// excluded; AllConfigsFailedError if none survive.
std::pair<TrainedPredictor, CvReport> grid_search(const HyperGrid& grid,
                                                  const std::vector<FeatureVector>& X,
                                                  const std::vector<double>& y, std::size_t k,
                                                  std::uint64_t seed, std::size_t jobs = 1,
                                                  const std::string& device = "");

// The shipped default grids (small, documented in docs/file_formats.md).
HyperGrid default_hyper_grid(ModelKind kind);

std::string hyper_grid_to_json(const HyperGrid& grid);
HyperGrid hyper_grid_from_json(const std::string& text);

std::string cv_report_to_csv(const CvReport& report);

}  // namespace latproph
