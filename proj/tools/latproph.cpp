// latproph: predicts CNN inference latency on edge GPUs from architecture
// features alone. Subcommands cover the whole workflow: corpus synthesis,
// feature extraction, splitting, tuning, training, evaluation, prediction,
// micro-benchmarks and feature importance.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "latproph/common.hpp"
#include "latproph/errors.hpp"
#include "latproph/evaluation.hpp"
#include "latproph/synthetic.hpp"
#include "latproph/tuning.hpp"

namespace fs = std::filesystem;
using namespace latproph;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<std::size_t> train_indices_for(const Dataset& ds, const std::string& split_path) {
  if (split_path.empty()) {
    std::vector<std::size_t> all(ds.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  const SplitPlan plan = split_plan_from_json(read_file(split_path), ds.size());
  return plan.train;
}

// key,value CSV written by `tune`/`train`, read back by `evaluate`
std::map<std::string, double> read_timings(const std::string& path) {
  std::istringstream in(read_file(path));
  std::map<std::string, double> out;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
  }
  return out;
}

struct FeatureCmd {
  std::vector<std::string> graphs;
  std::vector<int> sizes;
  std::string out;
  bool time_extraction = false;

  void run() const {
    std::string csv = "name,family,variant,input_size";
    for (const auto& name : feature_names()) csv += "," + name;
    csv += ",conv2d_flops,add_flops,mul_flops,pooling_flops,dense_flops\n";

    double total_ns = 0.0;
    std::size_t rows = 0;
    for (const auto& path : graphs) {
      const ModelGraph graph = parse_model(read_file(path));
      for (const int size : sizes) {
        const auto t0 = std::chrono::steady_clock::now();
        const ShapedGraph sg = infer_shapes(graph, size);
        const FeatureVector fv = extract_features(sg);
        const FlopBreakdown fb = count_flops(sg);
        total_ns += std::chrono::duration<double, std::nano>(std::chrono::steady_clock::now() - t0)
                        .count();
        ++rows;

        csv += graph.name + "," + graph.family + "," + graph.variant + "," + std::to_string(size);
        for (const double v : fv) csv += "," + format_double(v);
        for (const std::int64_t v : {fb.conv2d, fb.add, fb.mul, fb.pooling, fb.dense})
          csv += "," + std::to_string(v);
        csv += "\n";
      }
    }
    if (out.empty())
      std::cout << csv;
    else
      write_file(out, csv);
    if (time_extraction && rows > 0)
      std::cerr << "feature extraction: " << format_double(total_ns / static_cast<double>(rows))
                << " ns/graph over " << rows << " rows\n";
  }
};

struct SynthCmd {
  std::uint64_t seed = 0;
  int n_models = 64;
  std::string out_dir;
  std::string profiles_path;
  bool skip_graphs = false;

  void run() const {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n_models = n_models;
    std::vector<DeviceProfile> profiles;
    if (profiles_path.empty())
      profiles = {agx_like_profile(), tx2_like_profile()};
    else
      profiles = device_profiles_from_json(read_file(profiles_path));

    const auto datasets = build_synth_corpus(cfg, profiles);
    fs::create_directories(out_dir);
    for (const auto& ds : datasets) {
      const std::string path = out_dir + "/measurements_" + ds.device + ".csv";
      save_measurements(ds, path);
      std::cout << path << ": " << ds.size() << " records\n";
    }
    write_file(out_dir + "/profiles.json", device_profiles_to_json(profiles));

    if (!skip_graphs) {
      const auto entries = corpus_entries(cfg);
      fs::create_directories(out_dir + "/graphs");
      for (const auto& entry : entries)
        write_file(out_dir + "/graphs/" + entry.graph.name + ".cnn",
                   serialize_model(entry.graph));
      std::cout << out_dir << "/graphs: " << entries.size() << " model documents\n";
    }
  }
};

struct SplitCmd {
  std::string data;
  double train_ratio = 0.7;
  std::uint64_t seed = 0;
  std::string out;

  void run() const {
    const Dataset ds = load_measurements(data);
    const SplitPlan plan = make_split(ds, train_ratio, seed);
    write_file(out, split_plan_to_json(plan));
    std::cout << "train " << plan.train.size() << ", NIS " << plan.test_nis.size() << ", NCV "
              << plan.test_ncv.size() << ", NCA " << plan.test_nca.size() << "\n";
  }
};

struct TuneCmd {
  std::string data;
  std::string grid_path;
  std::string model_kind;
  std::string split_path;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out_model;
  std::string out_report;
  std::string out_timings;

  void run() const {
    if (grid_path.empty() && model_kind.empty())
      throw ConfigError("tune: pass --grid FILE or --model KIND (for the default grid)");
    const HyperGrid grid = grid_path.empty()
                               ? default_hyper_grid(model_kind_from_string(model_kind))
                               : hyper_grid_from_json(read_file(grid_path));

    const Dataset ds = load_measurements(data);
    const auto train = train_indices_for(ds, split_path);
    const auto X = features_of(ds, train);
    const auto y = targets_of(ds, train);

    auto [winner, report] = grid_search(grid, X, y, k, seed, jobs, ds.device);

    save_predictor(winner, out_model);
    const auto& best = report.per_config[report.best_config_index];
    std::cout << "best config #" << best.config_index << " " << best.config_json
              << " mean CV MAPE " << format_double(best.mean_mape) << "%\n";
    if (!out_report.empty()) write_file(out_report, cv_report_to_csv(report));
    if (!out_timings.empty()) {
      std::string csv = "key,value\n";
      csv += "tuning_time_s," + format_double(report.total_wall_time_s) + "\n";
      csv += "training_time_s," + format_double(report.final_training_time_s) + "\n";
      write_file(out_timings, csv);
    }
  }
};

struct TrainCmd {
  std::string data;
  std::string model_kind;
  std::string config_path;
  std::string split_path;
  std::uint64_t seed = 0;
  std::string out_model;
  std::string out_timings;

  void run() const {
    PredictorConfig cfg;
    bool config_has_seed = false;
    if (!config_path.empty()) {
      const std::string text = read_file(config_path);
      cfg = predictor_config_from_json(text);
      config_has_seed = text.find("\"seed\"") != std::string::npos;
      if (!model_kind.empty() && model_kind_from_string(model_kind) != cfg.kind)
        throw ConfigError("train: --model disagrees with the config file's kind");
    } else if (!model_kind.empty()) {
      cfg.kind = model_kind_from_string(model_kind);
    } else {
      throw ConfigError("train: pass --model KIND and/or --config FILE");
    }
    if (!config_has_seed) {
      cfg.mlp.seed = seed;
      cfg.rf.seed = seed;
      cfg.gbt.seed = seed;
    }

    const Dataset ds = load_measurements(data);
    const auto train = train_indices_for(ds, split_path);

    const auto t0 = std::chrono::steady_clock::now();
    const TrainedPredictor p =
        train_predictor(cfg, features_of(ds, train), targets_of(ds, train), ds.device);
    const double training_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    save_predictor(p, out_model);
    std::cout << out_model << ": " << to_string(p.kind) << " trained on " << train.size()
              << " records\n";
    if (!out_timings.empty())
      write_file(out_timings, "key,value\ntraining_time_s," + format_double(training_time) + "\n");
  }
};

struct EvaluateCmd {
  std::string model;
  std::string data;
  std::string split_path;
  std::string out_report;
  std::string out_scatter;
  std::string timings_path;
  bool bench = false;
  std::size_t reps = 200;

  void run() const {
    const TrainedPredictor p = load_predictor(model);
    const Dataset ds = load_measurements(data);
    const SplitPlan plan = split_plan_from_json(read_file(split_path), ds.size());

    EvalReport report = evaluate(p, ds, plan);
    if (!timings_path.empty()) {
      const auto timings = read_timings(timings_path);
      if (const auto it = timings.find("training_time_s"); it != timings.end())
        report.training_time_s = it->second;
      if (const auto it = timings.find("tuning_time_s"); it != timings.end())
        report.tuning_time_s = it->second;
    }
    if (bench) {
      std::vector<std::size_t> rows = plan.test_nis;
      if (rows.size() > 32) rows.resize(32);
      report.prediction_latency = bench_latency(p, features_of(ds, rows), reps);
    }

    std::cout << eval_report_to_table(report);
    if (!out_report.empty()) write_file(out_report, eval_report_to_csv(report));
    if (!out_scatter.empty()) export_scatter(p, ds, plan, out_scatter);
  }
};

struct PredictCmd {
  std::string model;
  std::string graph_path;
  int input_size = 224;

  void run() const {
    const TrainedPredictor p = load_predictor(model);
    const ModelGraph graph = parse_model(read_file(graph_path));
    const ShapedGraph sg = infer_shapes(graph, input_size);
    std::cout << format_double(p.predict(extract_features(sg))) << "\n";
  }
};

struct BenchCmd {
  std::string model;
  std::string data;
  std::size_t reps = 300;
  std::size_t rows = 32;
  std::string out;

  void run() const {
    const TrainedPredictor p = load_predictor(model);
    const Dataset ds = load_measurements(data);
    std::vector<std::size_t> idx(std::min(rows, ds.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const LatencyStats stats = bench_latency(p, features_of(ds, idx), reps);
    std::ostringstream os;
    os << "model: " << to_string(p.kind) << "\n"
       << "host: " << stats.host << "\n"
       << "samples: " << stats.samples << "\n"
       << "mean_ns: " << format_double(stats.mean_ns) << "\n"
       << "p50_ns: " << format_double(stats.p50_ns) << "\n"
       << "p99_ns: " << format_double(stats.p99_ns) << "\n";
    std::cout << os.str();
    if (!out.empty()) {
      std::string csv = "key,value\n";
      csv += "model," + std::string(to_string(p.kind)) + "\n";
      csv += "mean_ns," + format_double(stats.mean_ns) + "\n";
      csv += "p50_ns," + format_double(stats.p50_ns) + "\n";
      csv += "p99_ns," + format_double(stats.p99_ns) + "\n";
      write_file(out, csv);
    }
  }
};

struct ImportanceCmd {
  std::string model;
  std::string out;

  void run() const {
    const TrainedPredictor p = load_predictor(model);
    if (p.kind != ModelKind::kGbt)
      throw ConfigError("importance: F-scores come from a GBT predictor, got '" +
                        std::string(to_string(p.kind)) + "'");
    const auto scores = feature_importance(std::get<GbtModel>(p.payload));
    const auto order = rank_features(scores);
    std::string csv = "feature,f_score\n";
    for (const auto& name : order) {
      const auto it = scores.find(name);
      csv += name + "," + format_double(it == scores.end() ? 0.0 : it->second) + "\n";
    }
    std::cout << csv;
    if (!out.empty()) write_file(out, csv);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latproph: CNN inference latency prediction toolkit for edge GPUs"};
  app.require_subcommand(1);

  FeatureCmd features_cmd;
  auto* features_sub =
      app.add_subcommand("features", "Extract architecture features from model documents");
  features_sub->add_option("--graph", features_cmd.graphs, "Model document (.cnn), repeatable")
      ->required()
      ->check(CLI::ExistingFile);
  features_sub->add_option("--size", features_cmd.sizes, "Input image size, repeatable")
      ->required();
  features_sub->add_option("--out", features_cmd.out, "Output CSV path (default stdout)");
  features_sub->add_flag("--time", features_cmd.time_extraction,
                         "Report mean extraction wall time on stderr");

  SynthCmd synth_cmd;
  auto* synth_sub = app.add_subcommand("synth", "Generate the synthetic corpus and graphs");
  synth_sub->add_option("--seed", synth_cmd.seed, "Generator seed")->capture_default_str();
  synth_sub->add_option("--n-models", synth_cmd.n_models, "Random synthetic graph count")
      ->capture_default_str();
  synth_sub->add_option("--out-dir", synth_cmd.out_dir, "Output directory")->required();
  synth_sub->add_option("--profiles", synth_cmd.profiles_path,
                        "Device profile JSON (default: built-in agx-like + tx2-like)");
  synth_sub->add_flag("--no-graphs", synth_cmd.skip_graphs, "Skip writing model documents");

  SplitCmd split_cmd;
  auto* split_sub = app.add_subcommand("split", "Produce a train/NIS/NCV/NCA split plan");
  split_sub->add_option("--data", split_cmd.data, "Measurement CSV")->required()
      ->check(CLI::ExistingFile);
  split_sub->add_option("--train-ratio", split_cmd.train_ratio, "Training fraction")
      ->capture_default_str();
  split_sub->add_option("--seed", split_cmd.seed, "Split seed")->capture_default_str();
  split_sub->add_option("--out", split_cmd.out, "Split plan JSON path")->required();

  TuneCmd tune_cmd;
  auto* tune_sub = app.add_subcommand("tune", "Grid search with K-fold cross validation");
  tune_sub->add_option("--data", tune_cmd.data, "Measurement CSV")->required()
      ->check(CLI::ExistingFile);
  tune_sub->add_option("--grid", tune_cmd.grid_path, "Grid JSON file")->check(CLI::ExistingFile);
  tune_sub->add_option("--model", tune_cmd.model_kind,
                       "Model kind for the shipped default grid (ols/mlp/svr/rf/gbt)");
  tune_sub->add_option("--split", tune_cmd.split_path,
                       "Split plan JSON; only its train rows are used")
      ->check(CLI::ExistingFile);
  tune_sub->add_option("--k", tune_cmd.k, "Cross-validation folds")->capture_default_str();
  tune_sub->add_option("--seed", tune_cmd.seed, "Search seed")->capture_default_str();
  tune_sub->add_option("--jobs", tune_cmd.jobs, "Parallel workers over configurations")
      ->capture_default_str();
  tune_sub->add_option("--out", tune_cmd.out_model, "Winning predictor path (.lpk)")->required();
  tune_sub->add_option("--out-report", tune_cmd.out_report, "CV report CSV path");
  tune_sub->add_option("--out-timings", tune_cmd.out_timings, "Wall-time CSV path");

  TrainCmd train_cmd;
  auto* train_sub = app.add_subcommand("train", "Train one predictor with a fixed config");
  train_sub->add_option("--data", train_cmd.data, "Measurement CSV")->required()
      ->check(CLI::ExistingFile);
  train_sub->add_option("--model", train_cmd.model_kind, "Model kind (ols/mlp/svr/rf/gbt)");
  train_sub->add_option("--config", train_cmd.config_path, "Predictor config JSON")
      ->check(CLI::ExistingFile);
  train_sub->add_option("--split", train_cmd.split_path,
                        "Split plan JSON; only its train rows are used")
      ->check(CLI::ExistingFile);
  train_sub->add_option("--seed", train_cmd.seed,
                        "Model seed when the config file does not pin one")
      ->capture_default_str();
  train_sub->add_option("--out", train_cmd.out_model, "Predictor path (.lpk)")->required();
  train_sub->add_option("--out-timings", train_cmd.out_timings, "Wall-time CSV path");

  EvaluateCmd evaluate_cmd;
  auto* evaluate_sub = app.add_subcommand("evaluate", "Score a predictor on the three test spaces");
  evaluate_sub->add_option("--model", evaluate_cmd.model, "Predictor (.lpk)")->required()
      ->check(CLI::ExistingFile);
  evaluate_sub->add_option("--data", evaluate_cmd.data, "Measurement CSV")->required()
      ->check(CLI::ExistingFile);
  evaluate_sub->add_option("--split", evaluate_cmd.split_path, "Split plan JSON")->required()
      ->check(CLI::ExistingFile);
  evaluate_sub->add_option("--out-report", evaluate_cmd.out_report, "Report CSV path");
  evaluate_sub->add_option("--out-scatter", evaluate_cmd.out_scatter,
                           "Predicted-vs-measured scatter CSV path");
  evaluate_sub->add_option("--timings", evaluate_cmd.timings_path,
                           "Wall-time CSV from tune/train to merge into the report")
      ->check(CLI::ExistingFile);
  evaluate_sub->add_flag("--bench", evaluate_cmd.bench,
                         "Also measure prediction latency on test rows");
  evaluate_sub->add_option("--reps", evaluate_cmd.reps, "Benchmark repetitions (with --bench)")
      ->capture_default_str();

  PredictCmd predict_cmd;
  auto* predict_sub = app.add_subcommand("predict", "Predict latency for one model document");
  predict_sub->add_option("--model", predict_cmd.model, "Predictor (.lpk)")->required()
      ->check(CLI::ExistingFile);
  predict_sub->add_option("--graph", predict_cmd.graph_path, "Model document (.cnn)")->required()
      ->check(CLI::ExistingFile);
  predict_sub->add_option("--input-size", predict_cmd.input_size, "Input image size")
      ->capture_default_str();

  BenchCmd bench_cmd;
  auto* bench_sub = app.add_subcommand("bench", "Measure single-row prediction latency");
  bench_sub->add_option("--model", bench_cmd.model, "Predictor (.lpk)")->required()
      ->check(CLI::ExistingFile);
  bench_sub->add_option("--data", bench_cmd.data, "Measurement CSV supplying feature rows")
      ->required()
      ->check(CLI::ExistingFile);
  bench_sub->add_option("--reps", bench_cmd.reps, "Repetitions over the row set")
      ->capture_default_str();
  bench_sub->add_option("--rows", bench_cmd.rows, "Feature rows to cycle through")
      ->capture_default_str();
  bench_sub->add_option("--out", bench_cmd.out, "Stats CSV path");

  ImportanceCmd importance_cmd;
  auto* importance_sub =
      app.add_subcommand("importance", "F-score feature importance of a GBT predictor");
  importance_sub->add_option("--model", importance_cmd.model, "GBT predictor (.lpk)")->required()
      ->check(CLI::ExistingFile);
  importance_sub->add_option("--out", importance_cmd.out, "Output CSV path");

  try {
    app.parse(argc, argv);
    if (features_sub->parsed()) features_cmd.run();
    if (synth_sub->parsed()) synth_cmd.run();
    if (split_sub->parsed()) split_cmd.run();
    if (tune_sub->parsed()) tune_cmd.run();
    if (train_sub->parsed()) train_cmd.run();
    if (evaluate_sub->parsed()) evaluate_cmd.run();
    if (predict_sub->parsed()) predict_cmd.run();
    if (bench_sub->parsed()) bench_cmd.run();
    if (importance_sub->parsed()) importance_cmd.run();
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "run 'latproph --help' or 'latproph <subcommand> --help' for usage\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    std::cerr << "this is a bug; please file a report with the command line and input files\n";
    return 2;
  }
  return 0;
}
