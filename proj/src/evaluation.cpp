#include "latproph/evaluation.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "latproph/common.hpp"
#include "latproph/errors.hpp"

namespace latproph {

namespace {

std::size_t predictor_feature_count(const TrainedPredictor& p) {
  if (p.kind == ModelKind::kOls)
    return std::get<OlsModel>(p.payload).coefficients.size();
  return kFeatureCount;
}

SpaceMetrics evaluate_space(const TrainedPredictor& p, const Dataset& ds,
                            const std::vector<std::size_t>& idx, const std::string& name) {
  if (idx.empty()) throw EmptySpaceError("evaluate: test space " + name + " is empty");

  std::vector<double> y;
  std::vector<double> y_hat;
  y.reserve(idx.size());
  y_hat.reserve(idx.size());
  for (const std::size_t i : idx) {
    y.push_back(ds.records[i].latency_ms);
    y_hat.push_back(p.predict(ds.records[i].features));
  }

  SpaceMetrics metrics;
  metrics.space = name;
  metrics.count = idx.size();
  const auto apes = absolute_percentage_errors(y, y_hat);
  double sum = 0.0;
  for (const double a : apes) sum += a;
  metrics.mape_percent = sum / static_cast<double>(apes.size());
  if (apes.size() >= 2) metrics.mape_ci95_half_width = mape_ci95(apes).second;
  try {
    metrics.adjusted_r2 = adjusted_r2(y, y_hat, predictor_feature_count(p));
  } catch (const DegenerateError&) {
    metrics.adjusted_r2.reset();  // too few rows or constant targets
  }
  return metrics;
}

void do_not_optimize(double value) { asm volatile("" : : "g"(value) : "memory"); }

std::string optional_value(const std::optional<double>& v) {
  return v ? format_double(*v) : "not_measured";
}

}  // namespace

std::string host_tag() {
  utsname info{};
  if (uname(&info) != 0) return "unknown-host";
  return std::string(info.nodename) + " (" + info.machine + ")";
}

EvalReport evaluate(const TrainedPredictor& p, const Dataset& ds, const SplitPlan& plan) {
  EvalReport report;
  report.device = ds.device;
  report.model_kind = std::string(to_string(p.kind));
  report.nis = evaluate_space(p, ds, plan.test_nis, "NIS");
  report.ncv = evaluate_space(p, ds, plan.test_ncv, "NCV");
  report.nca = evaluate_space(p, ds, plan.test_nca, "NCA");
  return report;
}

LatencyStats bench_latency(const TrainedPredictor& p, const std::vector<FeatureVector>& X,
                           std::size_t reps) {
  if (reps < 100)
    throw ConfigError("bench_latency: reps must be >= 100, got " + std::to_string(reps));
  if (X.empty()) throw DimensionError("bench_latency: empty input set");

  for (const auto& x : X) do_not_optimize(p.predict(x));  // warm-up pass

  std::vector<double> samples;
  samples.reserve(reps * X.size());
  for (std::size_t r = 0; r < reps; ++r) {
    for (const auto& x : X) {
      const auto t0 = std::chrono::steady_clock::now();
      const double value = p.predict(x);
      const auto t1 = std::chrono::steady_clock::now();
      do_not_optimize(value);
      samples.push_back(
          static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()));
    }
  }

  LatencyStats stats;
  stats.samples = samples.size();
  stats.host = host_tag();
  double sum = 0.0;
  for (const double s : samples) sum += s;
  stats.mean_ns = sum / static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  stats.p50_ns = samples[samples.size() / 2];
  stats.p99_ns = samples[std::min(samples.size() - 1,
                                  static_cast<std::size_t>(0.99 * static_cast<double>(samples.size())))];
  return stats;
}

std::string scatter_csv(const TrainedPredictor& p, const Dataset& ds, const SplitPlan& plan) {
  std::string out = "space,model_name,variant,input_size,measured_ms,predicted_ms\n";
  const std::pair<const char*, const std::vector<std::size_t>*> spaces[] = {
      {"NIS", &plan.test_nis}, {"NCV", &plan.test_ncv}, {"NCA", &plan.test_nca}};
  for (const auto& [name, idx] : spaces) {
    for (const std::size_t i : *idx) {
      const auto& r = ds.records[i];
      out += name;
      out += ',';
      out += r.model_name;
      out += ',';
      out += r.variant;
      out += ',';
      out += std::to_string(r.input_size);
      out += ',';
      out += format_double(r.latency_ms);
      out += ',';
      out += format_double(p.predict(r.features));
      out += '\n';
    }
  }
  return out;
}

std::size_t export_scatter(const TrainedPredictor& p, const Dataset& ds, const SplitPlan& plan,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << scatter_csv(p, ds, plan);
  if (!out) throw IoError("write failed for '" + path + "'");
  return plan.test_nis.size() + plan.test_ncv.size() + plan.test_nca.size();
}

std::string eval_report_to_csv(const EvalReport& report) {
  std::string out = "key,value\n";
  auto add = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += ',';
    out += value;
    out += '\n';
  };
  add("device", report.device);
  add("model_kind", report.model_kind);
  for (const SpaceMetrics* m : {&report.nis, &report.ncv, &report.nca}) {
    std::string prefix = m->space;
    std::transform(prefix.begin(), prefix.end(), prefix.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    add(prefix + "_n", std::to_string(m->count));
    add(prefix + "_mape_percent", format_double(m->mape_percent));
    add(prefix + "_mape_ci95_half_width", format_double(m->mape_ci95_half_width));
    add(prefix + "_adjusted_r2", optional_value(m->adjusted_r2));
  }
  add("training_time_s", optional_value(report.training_time_s));
  add("tuning_time_s", optional_value(report.tuning_time_s));
  if (report.prediction_latency) {
    add("prediction_latency_mean_ns", format_double(report.prediction_latency->mean_ns));
    add("prediction_latency_p50_ns", format_double(report.prediction_latency->p50_ns));
    add("prediction_latency_p99_ns", format_double(report.prediction_latency->p99_ns));
    add("prediction_latency_host", report.prediction_latency->host);
  } else {
    add("prediction_latency_mean_ns", "not_measured");
    add("prediction_latency_p50_ns", "not_measured");
    add("prediction_latency_p99_ns", "not_measured");
    add("prediction_latency_host", "not_measured");
  }
  return out;
}

std::string eval_report_to_table(const EvalReport& report) {
  std::ostringstream os;
  os << "model: " << report.model_kind << "   device: " << report.device << "\n";
  os << "space   n      MAPE%     +-CI95    adj.R2\n";
  for (const SpaceMetrics* m : {&report.nis, &report.ncv, &report.nca}) {
    char line[128];
    const std::string r2_text =
        m->adjusted_r2 ? [&] {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%8.4f", *m->adjusted_r2);
          return std::string(buf);
        }()
                       : std::string("      --");
    std::snprintf(line, sizeof(line), "%-6s  %-5zu  %8.2f  %8.2f  %s\n", m->space.c_str(),
                  m->count, m->mape_percent, m->mape_ci95_half_width, r2_text.c_str());
    os << line;
  }
  os << "training_time_s: " << optional_value(report.training_time_s) << "\n";
  os << "tuning_time_s: " << optional_value(report.tuning_time_s) << "\n";
  if (report.prediction_latency) {
    os << "prediction_latency_ns (mean/p50/p99): " << format_double(report.prediction_latency->mean_ns)
       << " / " << format_double(report.prediction_latency->p50_ns) << " / "
       << format_double(report.prediction_latency->p99_ns) << " on "
       << report.prediction_latency->host << "\n";
  } else {
    os << "prediction_latency: not_measured\n";
  }
  return os.str();
}

}  // namespace latproph
