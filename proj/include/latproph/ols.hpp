#pragma once

#include <string>
#include <vector>

#include "latproph/features.hpp"

namespace latproph {

// Multiple linear regression: latency = intercept + sum coef_i * x[sel_i].
// Fitted on raw (unstandardized) features; predictions are intentionally
// unclamped — evaluation floors them only inside MAPE.
struct OlsModel {
  std::vector<double> coefficients;
  double intercept = 0.0;
  std::vector<std::string> selected_features;  // parallel to coefficients
  std::vector<int> selected_indices;  // canonical indices when the names are canonical

  double predict_row(const std::vector<double>& row) const;
  void resolve_indices();
};

struct StepwiseStep {
  std::string feature;
  double adjusted_r2 = 0.0;
};

struct StepwiseReport {
  std::vector<StepwiseStep> steps;
  std::size_t chosen_k = 0;
};

inline constexpr double kDefaultStepwiseStopDelta = 0.0005;

// Least squares via column-pivoted Householder QR (the design matrix is far
// too badly conditioned for normal equations: FLOPs columns reach 1e10+).
// Throws RankDeficientError naming the dependent column, DimensionError for
// n < p + 1 or ragged rows.
OlsModel fit_ols(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                 const std::vector<std::string>& column_names = {});

// Adds features of X_full cumulatively in `order`, tracking adjusted R^2;
// keeps the prefix up to the last step that improved by more than
// stop_delta, then refits on that prefix.
std::pair<OlsModel, StepwiseReport> stepwise_select(const std::vector<FeatureVector>& X_full,
                                                    const std::vector<double>& y,
                                                    const std::vector<std::string>& order,
                                                    double stop_delta = kDefaultStepwiseStopDelta);

double predict_ols(const OlsModel& m, const FeatureVector& x);

}  // namespace latproph
