#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latproph/features.hpp"

namespace latproph {

// One profiled (model, input size, device) -> latency sample. latency_ms is
// the mean over `replicates` runs; latency_std_ms is kept for future
// weighted regression but unused by the models.
struct MeasurementRecord {
  std::string model_name;
  std::string family;
  std::string variant;
  int input_size = 0;
  std::string device;
  int replicates = 1;
  double latency_ms = 0.0;
  double latency_std_ms = 0.0;
  FeatureVector features{};
};

struct Dataset {
  std::string device;
  std::vector<MeasurementRecord> records;

  std::size_t size() const { return records.size(); }
};

// Disjoint train / NIS / NCV / NCA index lists over one Dataset.
struct SplitPlan {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test_nis;
  std::vector<std::size_t> test_ncv;
  std::vector<std::size_t> test_nca;
  std::uint64_t seed = 0;
};

// Per-feature mean/std fitted on training rows only (population std;
// constant features get std = 1 and a warning flag).
struct Standardizer {
  FeatureVector mean{};
  FeatureVector std{};
  std::array<bool, kFeatureCount> constant_feature{};
};

// Exact header the measurement CSV must carry, in order.
extern const char* const kMeasurementCsvHeader;

// Throws IoError / SchemaError (with row number) / InvariantError (with row
// number). Row order is preserved.
Dataset load_measurements(const std::string& path);
Dataset parse_measurements_csv(const std::string& text, const std::string& origin);

std::string measurements_to_csv(const Dataset& ds);
void save_measurements(const Dataset& ds, const std::string& path);

// Validates all Dataset invariants (shared device, unique keys, positive
// latencies, feature/input-size agreement). Row numbers are 1-based data
// rows, matching the CSV reader's reporting.
void validate_dataset(const Dataset& ds);

// Splits into train plus the three exploration spaces:
//   NCA  whole families held out until >= 1/3 of the test budget,
//   NCV  whole variants held out of the remaining families (>= 1/3 budget),
//   NIS  held-out input sizes of remaining (family, variant) pairs, sized so
//        the train fraction lands within +-2 records of train_ratio.
// Deterministic given (ds, train_ratio, seed).
SplitPlan make_split(const Dataset& ds, double train_ratio, std::uint64_t seed);

Standardizer fit_standardizer(const Dataset& ds, const std::vector<std::size_t>& train);
Standardizer fit_standardizer(const std::vector<FeatureVector>& rows);
FeatureVector standardize(const Standardizer& st, const FeatureVector& fv);

std::vector<FeatureVector> features_of(const Dataset& ds, const std::vector<std::size_t>& idx);
std::vector<double> targets_of(const Dataset& ds, const std::vector<std::size_t>& idx);

std::string split_plan_to_json(const SplitPlan& plan);
SplitPlan split_plan_from_json(const std::string& text, std::size_t dataset_size);

}  // namespace latproph
