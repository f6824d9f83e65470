#pragma once

#include <optional>
#include <string>

#include "latproph/dataset.hpp"
#include "latproph/metrics.hpp"
#include "latproph/predictor.hpp"

namespace latproph {

struct LatencyStats {
  double mean_ns = 0.0;
  double p50_ns = 0.0;
  double p99_ns = 0.0;
  std::size_t samples = 0;
  std::string host;
};

struct SpaceMetrics {
  std::string space;
  std::size_t count = 0;
  double mape_percent = 0.0;
  double mape_ci95_half_width = 0.0;
  // adjusted R^2 needs n > p + 1 and non-constant targets; tiny spaces mark
  // it not-measured instead of reporting a silent zero
  std::optional<double> adjusted_r2;
};

struct EvalReport {
  std::string device;
  std::string model_kind;
  SpaceMetrics nis;
  SpaceMetrics ncv;
  SpaceMetrics nca;
  std::optional<double> training_time_s;
  std::optional<double> tuning_time_s;
  std::optional<LatencyStats> prediction_latency;
};

// Applies the predictor to each test space of the plan and fills the
// metrics; train rows are never touched. Throws EmptySpaceError naming the
// empty space.
EvalReport evaluate(const TrainedPredictor& p, const Dataset& ds, const SplitPlan& plan);

// Wall time of single-row predictions, reps passes over X after one warm-up
// pass; strictly single-threaded. Requires reps >= 100.
LatencyStats bench_latency(const TrainedPredictor& p, const std::vector<FeatureVector>& X,
                           std::size_t reps);

// CSV rows (space, model_name, variant, input_size, measured_ms,
// predicted_ms) for every test record of the plan.
std::string scatter_csv(const TrainedPredictor& p, const Dataset& ds, const SplitPlan& plan);
std::size_t export_scatter(const TrainedPredictor& p, const Dataset& ds, const SplitPlan& plan,
                           const std::string& path);

// key,value CSV; absent measurements are written as "not_measured"
std::string eval_report_to_csv(const EvalReport& report);
// aligned human-readable table
std::string eval_report_to_table(const EvalReport& report);

std::string host_tag();

}  // namespace latproph
