#include "latproph/ols.hpp"

#include <algorithm>
#include <cmath>

#include "latproph/errors.hpp"
#include "latproph/metrics.hpp"

namespace latproph {

namespace {

// Column-pivoted Householder QR least squares. A is n x p column-major,
// modified in place; returns the solution in the original column order.
// `names` is used for the RankDeficientError message.
std::vector<double> qr_solve(std::vector<std::vector<double>>& cols, std::vector<double> rhs,
                             const std::vector<std::string>& names) {
  const std::size_t p = cols.size();
  const std::size_t n = rhs.size();

  std::vector<std::size_t> perm(p);
  for (std::size_t j = 0; j < p; ++j) perm[j] = j;

  auto col_norm_tail = [&](std::size_t j, std::size_t from) {
    double s = 0.0;
    for (std::size_t i = from; i < n; ++i) s += cols[j][i] * cols[j][i];
    return s;
  };

  // column scales differ by 10+ orders of magnitude (FLOPs vs layer counts),
  // so rank detection compares each residual against its own original norm
  std::vector<double> original_norms(p);
  for (std::size_t j = 0; j < p; ++j) original_norms[j] = std::sqrt(col_norm_tail(j, 0));

  for (std::size_t k = 0; k < p; ++k) {
    // pivot: bring the column with the largest remaining relative norm forward
    std::size_t pivot = k;
    double best = -1.0;
    for (std::size_t j = k; j < p; ++j) {
      const double scale = original_norms[perm[j]];
      const double relative = scale > 0.0 ? col_norm_tail(j, k) / (scale * scale) : 0.0;
      if (relative > best) {
        best = relative;
        pivot = j;
      }
    }
    if (pivot != k) {
      std::swap(cols[k], cols[pivot]);
      std::swap(perm[k], perm[pivot]);
    }

    const double alpha = std::sqrt(col_norm_tail(k, k));
    if (!(alpha > original_norms[perm[k]] * 1e-10) || !(alpha > 0.0)) {
      const std::size_t original = perm[k];
      throw RankDeficientError("design matrix is rank deficient: column '" +
                               (original < names.size() ? names[original] : "?") +
                               "' is linearly dependent on the others");
    }

    // Householder vector for column k
    std::vector<double> v(n - k);
    for (std::size_t i = k; i < n; ++i) v[i - k] = cols[k][i];
    const double sign = v[0] >= 0.0 ? 1.0 : -1.0;
    v[0] += sign * alpha;
    double vnorm2 = 0.0;
    for (const double x : v) vnorm2 += x * x;

    auto reflect = [&](std::vector<double>& target) {
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i - k] * target[i];
      const double scale = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < n; ++i) target[i] -= scale * v[i - k];
    };
    for (std::size_t j = k; j < p; ++j) reflect(cols[j]);
    reflect(rhs);
  }

  // back substitution: R z = rhs[0..p)
  std::vector<double> z(p, 0.0);
  for (std::size_t k = p; k-- > 0;) {
    double s = rhs[k];
    for (std::size_t j = k + 1; j < p; ++j) s -= cols[j][k] * z[j];
    z[k] = s / cols[k][k];
  }

  std::vector<double> solution(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) solution[perm[k]] = z[k];
  return solution;
}

}  // namespace

double OlsModel::predict_row(const std::vector<double>& row) const {
  double out = intercept;
  for (std::size_t j = 0; j < coefficients.size(); ++j) out += coefficients[j] * row[j];
  return out;
}

void OlsModel::resolve_indices() {
  selected_indices.clear();
  for (const auto& name : selected_features) {
    const int idx = try_feature_index(name);
    if (idx < 0) {
      selected_indices.clear();
      return;  // generic column names; predict_ols is not applicable
    }
    selected_indices.push_back(idx);
  }
}

OlsModel fit_ols(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                 const std::vector<std::string>& column_names) {
  const std::size_t n = X.size();
  if (n != y.size()) throw DimensionError("fit_ols: |X| != |y|");
  if (n == 0) throw DimensionError("fit_ols: empty design");
  const std::size_t p = X[0].size();
  for (const auto& row : X)
    if (row.size() != p) throw DimensionError("fit_ols: ragged design matrix");
  if (n < p + 1)
    throw DimensionError("fit_ols: need n >= p + 1 rows (n = " + std::to_string(n) +
                         ", p = " + std::to_string(p) + ")");

  std::vector<std::string> names = column_names;
  if (names.empty()) {
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
  }
  names.push_back("(intercept)");

  // column-major copy with the intercept column appended
  std::vector<std::vector<double>> cols(p + 1, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) cols[j][i] = X[i][j];
    cols[p][i] = 1.0;
  }

  const std::vector<double> solution = qr_solve(cols, y, names);

  OlsModel model;
  model.coefficients.assign(solution.begin(), solution.begin() + static_cast<std::ptrdiff_t>(p));
  model.intercept = solution[p];
  model.selected_features.assign(names.begin(), names.end() - 1);
  model.resolve_indices();
  return model;
}

std::pair<OlsModel, StepwiseReport> stepwise_select(const std::vector<FeatureVector>& X_full,
                                                    const std::vector<double>& y,
                                                    const std::vector<std::string>& order,
                                                    double stop_delta) {
  if (stop_delta < 0.0) throw ConfigError("stepwise_select: stop_delta must be >= 0");
  std::vector<int> indices;
  indices.reserve(order.size());
  for (const auto& name : order) indices.push_back(feature_index(name));

  auto design_prefix = [&](std::size_t k) {
    std::vector<std::vector<double>> X(X_full.size(), std::vector<double>(k));
    for (std::size_t i = 0; i < X_full.size(); ++i)
      for (std::size_t j = 0; j < k; ++j)
        X[i][j] = X_full[i][static_cast<std::size_t>(indices[j])];
    return X;
  };
  auto names_prefix = [&](std::size_t k) {
    return std::vector<std::string>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  };

  StepwiseReport report;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    OlsModel step_model;
    try {
      step_model = fit_ols(design_prefix(k), y, names_prefix(k));
    } catch (const Error& e) {
      if (k == 1)
        throw DegenerateError(std::string("stepwise_select: the first feature fails to fit: ") +
                              e.what());
      throw;
    }
    std::vector<double> y_hat(y.size());
    const auto X = design_prefix(k);
    for (std::size_t i = 0; i < y.size(); ++i) y_hat[i] = step_model.predict_row(X[i]);
    report.steps.push_back({order[k - 1], adjusted_r2(y, y_hat, k)});
  }

  // keep the last step that still improved by more than stop_delta
  report.chosen_k = 1;
  for (std::size_t k = 2; k <= report.steps.size(); ++k) {
    if (report.steps[k - 1].adjusted_r2 - report.steps[k - 2].adjusted_r2 > stop_delta)
      report.chosen_k = k;
  }

  OlsModel model = fit_ols(design_prefix(report.chosen_k), y, names_prefix(report.chosen_k));
  return {std::move(model), std::move(report)};
}

double predict_ols(const OlsModel& m, const FeatureVector& x) {
  double out = m.intercept;
  if (m.selected_indices.size() == m.coefficients.size()) {
    for (std::size_t j = 0; j < m.coefficients.size(); ++j)
      out += m.coefficients[j] * x[static_cast<std::size_t>(m.selected_indices[j])];
    return out;
  }
  for (std::size_t j = 0; j < m.coefficients.size(); ++j)
    out += m.coefficients[j] * x[static_cast<std::size_t>(feature_index(m.selected_features[j]))];
  return out;
}

}  // namespace latproph
