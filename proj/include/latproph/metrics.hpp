#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace latproph {

// Prediction floor inside MAPE; targets are never clamped.
inline constexpr double kMapePredictionFloorMs = 1e-6;

// (100/n) * sum |y - yhat| / y, with yhat floored at kMapePredictionFloorMs.
// Throws DimensionError / NonPositiveTargetError.
double mape(const std::vector<double>& y, const std::vector<double>& y_hat);

// Per-sample absolute percentage errors (the samples behind mape / the CI).
std::vector<double> absolute_percentage_errors(const std::vector<double>& y,
                                               const std::vector<double>& y_hat);

// 1 - (1 - R^2)(n - 1)/(n - p - 1). Throws DegenerateError for constant y or
// n <= p + 1.
double adjusted_r2(const std::vector<double>& y, const std::vector<double>& y_hat, std::size_t p);

double r2(const std::vector<double>& y, const std::vector<double>& y_hat);

// Normal-approximation 95% CI over per-sample APEs: (mean, 1.96*sd/sqrt(n))
// with sample standard deviation. Throws DegenerateError for n < 2.
std::pair<double, double> mape_ci95(const std::vector<double>& apes);

}  // namespace latproph
