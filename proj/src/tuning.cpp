#include "latproph/tuning.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

#include "latproph/common.hpp"
#include "latproph/errors.hpp"
#include "latproph/metrics.hpp"
#include "latproph/rng.hpp"

namespace latproph {

using nlohmann::json;

std::string GridPoint::compact_json() const {
  nlohmann::ordered_json j;
  for (const auto& [key, value] : values) j[key] = value;
  return j.dump();
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed) {
  if (k < 2) throw ConfigError("kfold_split: k must be >= 2");
  if (k > n) throw ConfigError("kfold_split: k (" + std::to_string(k) +
                               ") exceeds the sample count (" + std::to_string(n) + ")");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 3));
  rng.shuffle(order);

  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t cursor = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                    order.begin() + static_cast<std::ptrdiff_t>(cursor + size));
    cursor += size;
  }
  return folds;
}

std::vector<GridPoint> grid_expand(const HyperGrid& grid) {
  for (const auto& [name, values] : grid.axes) {
    if (values.empty())
      throw ConfigError("grid axis '" + name + "' has no candidate values");
  }
  std::vector<GridPoint> points{GridPoint{}};
  // std::map iterates axes in lexicographic name order; earlier axes vary
  // slowest in the product below
  for (const auto& [name, values] : grid.axes) {
    std::vector<GridPoint> expanded;
    expanded.reserve(points.size() * values.size());
    for (const auto& point : points) {
      for (const auto& value : values) {
        GridPoint next = point;
        next.values[name] = value;
        expanded.push_back(std::move(next));
      }
    }
    points = std::move(expanded);
  }
  return points;
}

PredictorConfig config_from_grid_point(ModelKind kind, const GridPoint& point) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(kind));
  for (const auto& [key, value] : point.values) j[key] = value;
  return predictor_config_from_json(j.dump());
}

namespace {

void inject_config_seed(PredictorConfig& cfg, std::uint64_t seed) {
  switch (cfg.kind) {
    case ModelKind::kMlp: cfg.mlp.seed = seed; break;
    case ModelKind::kRf: cfg.rf.seed = seed; break;
    case ModelKind::kGbt: cfg.gbt.seed = seed; break;
    default: break;  // OLS and SVR fits are deterministic without a seed
  }
}

}  // namespace

std::pair<TrainedPredictor, CvReport> grid_search(const HyperGrid& grid,
                                                  const std::vector<FeatureVector>& X,
                                                  const std::vector<double>& y, std::size_t k,
                                                  std::uint64_t seed, std::size_t jobs,
                                                  const std::string& device) {
  if (X.size() != y.size()) throw DimensionError("grid_search: |X| != |y|");
  const auto folds = kfold_split(X.size(), k, seed);
  const auto points = grid_expand(grid);

  CvReport report;
  report.model_kind = grid.model_kind;
  report.fold_count = k;
  report.total_configs = points.size();
  report.per_config.resize(points.size());

  const auto search_start = std::chrono::steady_clock::now();

  auto evaluate_config = [&](std::size_t c) {
    CvConfigResult& result = report.per_config[c];
    result.config_index = c;
    result.config_json = points[c].compact_json();
    const auto config_start = std::chrono::steady_clock::now();
    try {
      PredictorConfig cfg = config_from_grid_point(grid.model_kind, points[c]);
      if (points[c].values.find("seed") == points[c].values.end())
        inject_config_seed(cfg, mix_seed(seed, c));

      for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<FeatureVector> x_train, x_valid;
        std::vector<double> y_train, y_valid;
        for (std::size_t g = 0; g < folds.size(); ++g) {
          for (const std::size_t i : folds[g]) {
            if (g == f) {
              x_valid.push_back(X[i]);
              y_valid.push_back(y[i]);
            } else {
              x_train.push_back(X[i]);
              y_train.push_back(y[i]);
            }
          }
        }
        const TrainedPredictor p = train_predictor(cfg, x_train, y_train, device);
        std::vector<double> preds(x_valid.size());
        for (std::size_t i = 0; i < x_valid.size(); ++i) preds[i] = p.predict(x_valid[i]);
        result.fold_mapes.push_back(mape(y_valid, preds));
      }

      double mean = 0.0;
      for (const double m : result.fold_mapes) mean += m;
      mean /= static_cast<double>(result.fold_mapes.size());
      double var = 0.0;
      for (const double m : result.fold_mapes) var += (m - mean) * (m - mean);
      var /= static_cast<double>(result.fold_mapes.size() > 1 ? result.fold_mapes.size() - 1 : 1);
      result.mean_mape = mean;
      result.std_mape = std::sqrt(var);
    } catch (const Error& e) {
      result.failed = true;
      result.error = e.what();
      log_info("grid config " + std::to_string(c) + " failed: " + result.error);
    }
    result.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - config_start).count();
  };

  if (jobs <= 1 || points.size() <= 1) {
    for (std::size_t c = 0; c < points.size(); ++c) evaluate_config(c);
  } else {
    std::atomic<std::size_t> next{0};
    const std::size_t workers = std::min(jobs, points.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t c = next.fetch_add(1);
          if (c >= points.size()) return;
          evaluate_config(c);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  bool any = false;
  for (std::size_t c = 0; c < report.per_config.size(); ++c) {
    const auto& result = report.per_config[c];
    if (result.failed) continue;
    if (!any || result.mean_mape < report.per_config[report.best_config_index].mean_mape) {
      report.best_config_index = c;
      any = true;
    }
  }
  if (!any) throw AllConfigsFailedError("grid_search: every configuration failed");

  PredictorConfig best = config_from_grid_point(grid.model_kind, points[report.best_config_index]);
  if (points[report.best_config_index].values.find("seed") ==
      points[report.best_config_index].values.end())
    inject_config_seed(best, mix_seed(seed, report.best_config_index));
  const auto refit_start = std::chrono::steady_clock::now();
  TrainedPredictor winner = train_predictor(best, X, y, device);
  report.final_training_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - refit_start).count();

  report.total_wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - search_start).count();
  return {std::move(winner), std::move(report)};
}

HyperGrid default_hyper_grid(ModelKind kind) {
  HyperGrid grid;
  grid.model_kind = kind;
  switch (kind) {
    case ModelKind::kOls:
      grid.axes["stop_delta"] = {0.0, 0.0005, 0.005};
      break;
    case ModelKind::kMlp:
      grid.axes["hidden_layers"] = {json::array({32}), json::array({64, 32})};
      grid.axes["learning_rate"] = {0.003, 0.01};
      grid.axes["epochs"] = {300};
      grid.axes["batch_size"] = {32};
      grid.axes["activation"] = {"relu"};
      grid.axes["momentum"] = {0.9};
      break;
    case ModelKind::kSvr:
      grid.axes["kernel"] = {"linear", "rbf"};
      grid.axes["cost_c"] = {1.0, 10.0, 100.0};
      grid.axes["epsilon"] = {0.01, 0.1};
      grid.axes["gamma"] = {0.05};
      break;
    case ModelKind::kRf:
      grid.axes["n_estimators"] = {100};
      grid.axes["max_depth"] = {0, 12};
      grid.axes["min_samples_leaf"] = {1, 2};
      grid.axes["max_features"] = {6, 11};
      break;
    case ModelKind::kGbt:
      grid.axes["n_rounds"] = {300};
      grid.axes["learning_rate"] = {0.05, 0.1};
      grid.axes["max_depth"] = {3, 5};
      grid.axes["min_samples_leaf"] = {1, 3};
      grid.axes["lambda_reg"] = {0.0, 1.0};
      break;
  }
  return grid;
}

std::string hyper_grid_to_json(const HyperGrid& grid) {
  nlohmann::ordered_json j;
  j["model_kind"] = std::string(to_string(grid.model_kind));
  nlohmann::ordered_json axes = nlohmann::ordered_json::object();
  for (const auto& [name, values] : grid.axes) axes[name] = values;
  j["axes"] = std::move(axes);
  return j.dump(2) + "\n";
}

HyperGrid hyper_grid_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed grid file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("model_kind") || !j.contains("axes"))
    throw ConfigError("grid file needs 'model_kind' and 'axes' fields");
  HyperGrid grid;
  grid.model_kind = model_kind_from_string(j.at("model_kind").get<std::string>());
  for (const auto& [name, values] : j.at("axes").items()) {
    if (!values.is_array()) throw ConfigError("grid axis '" + name + "' must be an array");
    grid.axes[name] = std::vector<json>(values.begin(), values.end());
  }
  // validate axis names against the family's config schema
  const auto points = grid_expand(grid);
  if (!points.empty()) config_from_grid_point(grid.model_kind, points.front());
  return grid;
}

std::string cv_report_to_csv(const CvReport& report) {
  std::string out = "config_index,config,mean_mape,std_mape,failed,error\n";
  for (const auto& result : report.per_config) {
    std::string config = result.config_json;
    for (auto& c : config)
      if (c == ',') c = ';';  // keep the CSV single-delimiter
    out += std::to_string(result.config_index);
    out += ',';
    out += config;
    out += ',';
    out += result.failed ? "" : format_double(result.mean_mape);
    out += ',';
    out += result.failed ? "" : format_double(result.std_mape);
    out += ',';
    out += result.failed ? "1" : "0";
    out += ',';
    std::string error = result.error;
    for (auto& c : error)
      if (c == ',' || c == '\n') c = ';';
    out += error;
    out += '\n';
  }
  return out;
}

}  // namespace latproph
