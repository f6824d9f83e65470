// Drives the installed binary end to end through a scratch directory.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return LATPROPH_CLI_PATH; }

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out_path = fs::temp_directory_path() / ("latproph_out_" + std::to_string(counter));
  const fs::path err_path = fs::temp_directory_path() / ("latproph_err_" + std::to_string(counter));
  ++counter;
  const std::string cmd = std::string(cli_path()) + " " + args + " >" + out_path.string() +
                          " 2>" + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  fs::remove(out_path);
  fs::remove(err_path);
  return result;
}

// one shared scratch pipeline so the expensive synth step runs once
struct Pipeline {
  fs::path dir;
  std::string data;
  std::string plan;
  std::string model;

  Pipeline() {
    dir = fs::temp_directory_path() / "latproph_cli_pipeline";
    fs::remove_all(dir);
    fs::create_directories(dir);
    data = (dir / "corpus/measurements_agx-like.csv").string();
    plan = (dir / "plan.json").string();
    model = (dir / "gbt.lpk").string();

    RunResult r = run_cli("synth --seed 3 --n-models 2 --out-dir " + (dir / "corpus").string());
    REQUIRE(r.exit_code == 0);
    r = run_cli("split --data " + data + " --train-ratio 0.7 --seed 5 --out " + plan);
    REQUIRE(r.exit_code == 0);
    r = run_cli("train --data " + data + " --model gbt --split " + plan + " --seed 11 --out " +
                model);
    REQUIRE(r.exit_code == 0);
  }
};

const Pipeline& pipeline() {
  static const Pipeline p;
  return p;
}

}  // namespace

TEST_CASE("--help exits 0 and documents every flag, for every subcommand") {
  const RunResult top = run_cli("--help");
  CHECK(top.exit_code == 0);
  for (const char* sub :
       {"features", "synth", "split", "tune", "train", "evaluate", "predict", "bench",
        "importance"}) {
    CHECK(top.out.find(sub) != std::string::npos);
    const RunResult help = run_cli(std::string(sub) + " --help");
    CHECK(help.exit_code == 0);
    CHECK(help.out.find("--help") != std::string::npos);
  }

  // spot-check flag documentation coverage
  CHECK(run_cli("synth --help").out.find("--n-models") != std::string::npos);
  CHECK(run_cli("split --help").out.find("--train-ratio") != std::string::npos);
  const std::string tune_help = run_cli("tune --help").out;
  for (const char* flag : {"--data", "--grid", "--model", "--split", "--k", "--seed", "--jobs",
                           "--out", "--out-report", "--out-timings"})
    CHECK(tune_help.find(flag) != std::string::npos);
  const std::string eval_help = run_cli("evaluate --help").out;
  for (const char* flag : {"--model", "--data", "--split", "--out-report", "--out-scatter",
                           "--timings", "--bench", "--reps"})
    CHECK(eval_help.find(flag) != std::string::npos);
}

TEST_CASE("unknown flags are user errors (exit 1)") {
  const RunResult r = run_cli("split --bogus 3");
  CHECK(r.exit_code == 1);
  CHECK(!r.err.empty());
}

TEST_CASE("missing subcommand is a user error") {
  const RunResult r = run_cli("");
  CHECK(r.exit_code == 1);
}

TEST_CASE("synth corpus is byte-identical across same-seed runs") {
  const auto& p = pipeline();
  const fs::path second = p.dir / "corpus2";
  const RunResult r =
      run_cli("synth --seed 3 --n-models 2 --no-graphs --out-dir " + second.string());
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(p.data) == slurp(second / "measurements_agx-like.csv"));
  CHECK(!slurp(p.data).empty());
}

TEST_CASE("predict emits one positive decimal on the happy path") {
  const auto& p = pipeline();
  const fs::path graph = p.dir / "corpus/graphs/resnet_v1-50.cnn";
  REQUIRE(fs::exists(graph));
  const RunResult r = run_cli("predict --model " + p.model + " --graph " + graph.string() +
                              " --input-size 224");
  REQUIRE(r.exit_code == 0);
  const double value = std::stod(r.out);
  CHECK(value > 0.0);

  // deterministic across calls
  const RunResult again = run_cli("predict --model " + p.model + " --graph " + graph.string() +
                                  " --input-size 224");
  CHECK(again.out == r.out);
}

TEST_CASE("tune with k=1 fails with a K-fold message and exit 1") {
  const auto& p = pipeline();
  const RunResult r = run_cli("tune --data " + p.data + " --model ols --k 1 --out " +
                              (p.dir / "never.lpk").string());
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("k") != std::string::npos);
  CHECK(!fs::exists(p.dir / "never.lpk"));
}

TEST_CASE("evaluate writes a complete report and scatter") {
  const auto& p = pipeline();
  const std::string report = (p.dir / "report.csv").string();
  const std::string scatter = (p.dir / "scatter.csv").string();
  const RunResult r = run_cli("evaluate --model " + p.model + " --data " + p.data + " --split " +
                              p.plan + " --out-report " + report + " --out-scatter " + scatter);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("NIS") != std::string::npos);
  const std::string report_text = slurp(report);
  CHECK(report_text.find("nca_mape_percent") != std::string::npos);
  CHECK(report_text.find("training_time_s,not_measured") != std::string::npos);
  CHECK(slurp(scatter).find("space,model_name") != std::string::npos);
}

TEST_CASE("features subcommand emits canonical columns") {
  const auto& p = pipeline();
  const fs::path graph = p.dir / "corpus/graphs/mobilenet_v1-100.cnn";
  const RunResult r =
      run_cli("features --graph " + graph.string() + " --size 224 --size 96");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("name,family,variant,input_size,total_flops,") != std::string::npos);
  CHECK(r.out.find("conv2d_flops") != std::string::npos);
  // one header plus two rows
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
}

TEST_CASE("importance requires a GBT predictor and prints ranked F-scores") {
  const auto& p = pipeline();
  const RunResult r = run_cli("importance --model " + p.model);
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("feature,f_score") != std::string::npos);

  const std::string ols_model = (p.dir / "ols.lpk").string();
  REQUIRE(run_cli("train --data " + p.data + " --model ols --split " + p.plan + " --out " +
                  ols_model)
              .exit_code == 0);
  const RunResult wrong = run_cli("importance --model " + ols_model);
  CHECK(wrong.exit_code == 1);
}

TEST_CASE("bench prints latency stats") {
  const auto& p = pipeline();
  const RunResult r =
      run_cli("bench --model " + p.model + " --data " + p.data + " --reps 100 --rows 4");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("mean_ns:") != std::string::npos);
  CHECK(r.out.find("p99_ns:") != std::string::npos);
}

TEST_CASE("internal errors exit 2") {
  // a corrupted predictor container is a user error (exit 1), not internal
  const auto& p = pipeline();
  const fs::path bad = p.dir / "bad.lpk";
  std::ofstream(bad) << "LATPROPH-PREDICTOR v1\nnot json\nchecksum 0\n";
  const RunResult r = run_cli("predict --model " + bad.string() + " --graph " +
                              (p.dir / "corpus/graphs/resnet_v1-50.cnn").string() +
                              " --input-size 64");
  CHECK(r.exit_code == 1);
}
