#include "latproph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "latproph/errors.hpp"

namespace latproph {

std::vector<double> absolute_percentage_errors(const std::vector<double>& y,
                                               const std::vector<double>& y_hat) {
  if (y.size() != y_hat.size())
    throw DimensionError("mape: " + std::to_string(y.size()) + " targets vs " +
                         std::to_string(y_hat.size()) + " predictions");
  if (y.empty()) throw DimensionError("mape: empty target vector");
  std::vector<double> apes(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0))
      throw NonPositiveTargetError("mape: target " + std::to_string(i) + " is not positive");
    const double pred = std::max(y_hat[i], kMapePredictionFloorMs);
    apes[i] = 100.0 * std::abs(y[i] - pred) / y[i];
  }
  return apes;
}

double mape(const std::vector<double>& y, const std::vector<double>& y_hat) {
  const auto apes = absolute_percentage_errors(y, y_hat);
  double sum = 0.0;
  for (const double a : apes) sum += a;
  return sum / static_cast<double>(apes.size());
}

double r2(const std::vector<double>& y, const std::vector<double>& y_hat) {
  if (y.size() != y_hat.size() || y.empty())
    throw DimensionError("r2: mismatched or empty vectors");
  double mean = 0.0;
  for (const double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sse += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    sst += (y[i] - mean) * (y[i] - mean);
  }
  if (sst <= 0.0) throw DegenerateError("r2: constant targets");
  return 1.0 - sse / sst;
}

double adjusted_r2(const std::vector<double>& y, const std::vector<double>& y_hat,
                   std::size_t p) {
  const std::size_t n = y.size();
  if (n <= p + 1)
    throw DegenerateError("adjusted_r2: need n > p + 1 (n = " + std::to_string(n) +
                          ", p = " + std::to_string(p) + ")");
  const double plain = r2(y, y_hat);
  return 1.0 - (1.0 - plain) * (static_cast<double>(n) - 1.0) /
                   (static_cast<double>(n) - static_cast<double>(p) - 1.0);
}

std::pair<double, double> mape_ci95(const std::vector<double>& apes) {
  const std::size_t n = apes.size();
  if (n < 2) throw DegenerateError("mape_ci95: need at least 2 samples");
  double mean = 0.0;
  for (const double a : apes) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (const double a : apes) var += (a - mean) * (a - mean);
  var /= static_cast<double>(n - 1);  // sample std
  const double half_width = 1.96 * std::sqrt(var) / std::sqrt(static_cast<double>(n));
  return {mean, half_width};
}

}  // namespace latproph
