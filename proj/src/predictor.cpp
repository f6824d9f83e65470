#include "latproph/predictor.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <sstream>

#include "latproph/common.hpp"
#include "latproph/errors.hpp"
#include "latproph/rng.hpp"
#include "nlohmann/json.hpp"

namespace latproph {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {
constexpr const char* kContainerMagic = "LATPROPH-PREDICTOR";
constexpr int kContainerVersion = 1;
}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kOls: return "ols";
    case ModelKind::kMlp: return "mlp";
    case ModelKind::kSvr: return "svr";
    case ModelKind::kRf: return "rf";
    case ModelKind::kGbt: return "gbt";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "ols") return ModelKind::kOls;
  if (s == "mlp") return ModelKind::kMlp;
  if (s == "svr") return ModelKind::kSvr;
  if (s == "rf") return ModelKind::kRf;
  if (s == "gbt") return ModelKind::kGbt;
  throw ConfigError("unknown model kind '" + s + "' (expected ols/mlp/svr/rf/gbt)");
}

namespace {

std::vector<double> to_row(const FeatureVector& fv) {
  return std::vector<double>(fv.begin(), fv.end());
}

FeatureVector log1p_all(const FeatureVector& fv) {
  FeatureVector out;
  for (std::size_t f = 0; f < kFeatureCount; ++f) out[f] = std::log1p(fv[f]);
  return out;
}

std::string iso_timestamp() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr)
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  else
    t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fingerprint_rows(const std::vector<FeatureVector>& X, const std::vector<double>& y) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& row : X)
    for (const double v : row) h = fnv1a64(format_double(v) + ",", h);
  for (const double v : y) h = fnv1a64(format_double(v) + ";", h);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- payload serialization ----

json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const auto& node : tree.nodes)
    nodes.push_back({node.feature, node.threshold, node.left, node.right, node.value});
  return json{{"depth", tree.depth}, {"nodes", std::move(nodes)}};
}

RegressionTree tree_from_json(const json& j) {
  RegressionTree tree;
  tree.depth = j.at("depth").get<int>();
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.value = n.at(4).get<double>();
    tree.nodes.push_back(node);
  }
  return tree;
}

json ols_to_json(const OlsModel& m) {
  return json{{"coefficients", m.coefficients},
              {"intercept", m.intercept},
              {"selected_features", m.selected_features}};
}

OlsModel ols_from_json(const json& j) {
  OlsModel m;
  m.coefficients = j.at("coefficients").get<std::vector<double>>();
  m.intercept = j.at("intercept").get<double>();
  m.selected_features = j.at("selected_features").get<std::vector<std::string>>();
  m.resolve_indices();
  return m;
}

json mlp_to_json(const MlpModel& m) {
  return json{{"hidden_layers", m.config.hidden_layers},
              {"activation", std::string(to_string(m.config.activation))},
              {"learning_rate", m.config.learning_rate},
              {"epochs", m.config.epochs},
              {"batch_size", m.config.batch_size},
              {"seed", m.config.seed},
              {"momentum", m.config.momentum},
              {"layer_dims", m.layer_dims},
              {"weights", m.weights},
              {"biases", m.biases}};
}

MlpModel mlp_from_json(const json& j) {
  MlpModel m;
  m.config.hidden_layers = j.at("hidden_layers").get<std::vector<int>>();
  m.config.activation = mlp_activation_from_string(j.at("activation").get<std::string>());
  m.config.learning_rate = j.at("learning_rate").get<double>();
  m.config.epochs = j.at("epochs").get<int>();
  m.config.batch_size = j.at("batch_size").get<int>();
  m.config.seed = j.at("seed").get<std::uint64_t>();
  m.config.momentum = j.at("momentum").get<double>();
  m.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  return m;
}

json svr_config_to_json(const SvrConfig& cfg) {
  return json{{"kernel", std::string(to_string(cfg.kernel))},
              {"gamma", cfg.gamma},
              {"degree", cfg.degree},
              {"coef0", cfg.coef0},
              {"cost_c", cfg.cost_c},
              {"epsilon", cfg.epsilon},
              {"tolerance", cfg.tolerance},
              {"max_iterations", cfg.max_iterations}};
}

SvrConfig svr_config_from_json(const json& j) {
  SvrConfig cfg;
  cfg.kernel = svr_kernel_from_string(j.at("kernel").get<std::string>());
  cfg.gamma = j.at("gamma").get<double>();
  cfg.degree = j.at("degree").get<int>();
  cfg.coef0 = j.at("coef0").get<double>();
  cfg.cost_c = j.at("cost_c").get<double>();
  cfg.epsilon = j.at("epsilon").get<double>();
  cfg.tolerance = j.at("tolerance").get<double>();
  cfg.max_iterations = j.at("max_iterations").get<std::size_t>();
  return cfg;
}

json svr_to_json(const SvrModel& m) {
  return json{{"config", svr_config_to_json(m.config)},
              {"support_vectors", m.support_vectors},
              {"dual_coefficients", m.dual_coefficients},
              {"bias", m.bias},
              {"log_target", m.log_target}};
}

SvrModel svr_from_json(const json& j) {
  SvrModel m;
  m.config = svr_config_from_json(j.at("config"));
  m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
  m.dual_coefficients = j.at("dual_coefficients").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.log_target = j.at("log_target").get<bool>();
  return m;
}

json rf_to_json(const RfModel& m) {
  json trees = json::array();
  for (const auto& tree : m.trees) trees.push_back(tree_to_json(tree));
  return json{{"trees", std::move(trees)},
              {"feature_use_counts", m.feature_use_counts},
              {"n_features", m.n_features},
              {"log_target", m.log_target}};
}

RfModel rf_from_json(const json& j) {
  RfModel m;
  for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
  m.feature_use_counts = j.at("feature_use_counts").get<std::vector<std::vector<std::size_t>>>();
  m.n_features = j.at("n_features").get<std::size_t>();
  m.log_target = j.at("log_target").get<bool>();
  return m;
}

json gbt_to_json(const GbtModel& m) {
  json trees = json::array();
  for (const auto& tree : m.trees) trees.push_back(tree_to_json(tree));
  return json{{"base_prediction", m.base_prediction},
              {"learning_rate", m.learning_rate},
              {"trees", std::move(trees)},
              {"feature_use_counts", m.feature_use_counts},
              {"n_features", m.n_features},
              {"log_target", m.log_target},
              {"train_loss", m.train_loss},
              {"valid_loss", m.valid_loss}};
}

GbtModel gbt_from_json(const json& j) {
  GbtModel m;
  m.base_prediction = j.at("base_prediction").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
  m.feature_use_counts = j.at("feature_use_counts").get<std::vector<std::vector<std::size_t>>>();
  m.n_features = j.at("n_features").get<std::size_t>();
  m.log_target = j.at("log_target").get<bool>();
  m.train_loss = j.at("train_loss").get<std::vector<double>>();
  m.valid_loss = j.at("valid_loss").get<std::vector<double>>();
  return m;
}

json standardizer_to_json(const Standardizer& st) {
  return json{{"mean", std::vector<double>(st.mean.begin(), st.mean.end())},
              {"std", std::vector<double>(st.std.begin(), st.std.end())},
              {"constant_feature",
               std::vector<bool>(st.constant_feature.begin(), st.constant_feature.end())}};
}

Standardizer standardizer_from_json(const json& j) {
  Standardizer st;
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto sd = j.at("std").get<std::vector<double>>();
  const auto constant = j.at("constant_feature").get<std::vector<bool>>();
  if (mean.size() != kFeatureCount || sd.size() != kFeatureCount ||
      constant.size() != kFeatureCount)
    throw ChecksumError("standardizer arrays have the wrong arity");
  std::copy(mean.begin(), mean.end(), st.mean.begin());
  std::copy(sd.begin(), sd.end(), st.std.begin());
  std::copy(constant.begin(), constant.end(), st.constant_feature.begin());
  return st;
}

}  // namespace

double TrainedPredictor::predict(const FeatureVector& x) const {
  switch (kind) {
    case ModelKind::kOls:
      return predict_ols(std::get<OlsModel>(payload), x);
    case ModelKind::kMlp: {
      const FeatureVector u = log1p_features ? log1p_all(x) : x;
      const FeatureVector z = standardizer ? standardize(*standardizer, u) : u;
      const double v = mlp_forward(std::get<MlpModel>(payload), to_row(z));
      return log_target ? std::exp(v) : v;
    }
    case ModelKind::kSvr: {
      const FeatureVector u = log1p_features ? log1p_all(x) : x;
      const FeatureVector z = standardizer ? standardize(*standardizer, u) : u;
      return predict_svr(std::get<SvrModel>(payload), to_row(z));
    }
    case ModelKind::kRf:
      return predict_rf(std::get<RfModel>(payload), to_row(x));
    case ModelKind::kGbt:
      return predict_gbt(std::get<GbtModel>(payload), to_row(x));
  }
  return 0.0;
}

TrainedPredictor train_predictor(const PredictorConfig& cfg,
                                 const std::vector<FeatureVector>& X,
                                 const std::vector<double>& y, const std::string& device) {
  if (X.size() != y.size()) throw DimensionError("train_predictor: |X| != |y|");
  if (X.empty()) throw EmptyTrainError("train_predictor: empty training set");

  TrainedPredictor p;
  p.kind = cfg.kind;
  p.metadata.device = device;
  p.metadata.train_fingerprint = fingerprint_rows(X, y);
  p.metadata.created_at = iso_timestamp();

  std::vector<double> log_y(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0))
      throw InvariantError("train_predictor: latency targets must be positive");
    log_y[i] = std::log(y[i]);
  }

  switch (cfg.kind) {
    case ModelKind::kOls: {
      std::vector<std::string> order = cfg.ols.order;
      if (order.empty())
        order.assign(feature_names().begin(), feature_names().end());
      auto [model, report] = stepwise_select(X, y, order, cfg.ols.stop_delta);
      (void)report;
      p.payload = std::move(model);
      p.log_target = false;
      break;
    }
    case ModelKind::kMlp: {
      std::vector<FeatureVector> compressed(X.size());
      for (std::size_t i = 0; i < X.size(); ++i) compressed[i] = log1p_all(X[i]);
      const Standardizer st = fit_standardizer(compressed);
      std::vector<std::vector<double>> rows(X.size());
      for (std::size_t i = 0; i < X.size(); ++i) rows[i] = to_row(standardize(st, compressed[i]));
      p.payload = train_mlp(cfg.mlp, rows, log_y);
      p.standardizer = st;
      p.log1p_features = true;
      p.log_target = true;
      break;
    }
    case ModelKind::kSvr: {
      std::vector<FeatureVector> compressed(X.size());
      for (std::size_t i = 0; i < X.size(); ++i) compressed[i] = log1p_all(X[i]);
      const Standardizer st = fit_standardizer(compressed);
      std::vector<std::vector<double>> rows(X.size());
      for (std::size_t i = 0; i < X.size(); ++i) rows[i] = to_row(standardize(st, compressed[i]));
      auto [model, info] = fit_svr(cfg.svr, rows, log_y);
      if (info.no_convergence_warning)
        log_info("svr: fit did not reach tolerance (gap " + format_double(info.kkt_gap) + ")");
      model.log_target = true;
      p.payload = std::move(model);
      p.standardizer = st;
      p.log1p_features = true;
      p.log_target = true;
      break;
    }
    case ModelKind::kRf: {
      std::vector<std::vector<double>> rows(X.size());
      for (std::size_t i = 0; i < X.size(); ++i) rows[i] = to_row(X[i]);
      RfModel model = fit_rf(cfg.rf, rows, log_y);
      model.log_target = true;
      p.payload = std::move(model);
      p.log_target = true;
      break;
    }
    case ModelKind::kGbt: {
      std::vector<std::vector<double>> rows(X.size());
      for (std::size_t i = 0; i < X.size(); ++i) rows[i] = to_row(X[i]);

      GbtModel model;
      if (cfg.gbt.early_stopping_rounds > 0) {
        // carve a seeded 15% validation slice out of the training rows
        std::vector<std::size_t> order(rows.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(mix_seed(cfg.gbt.seed, 7));
        rng.shuffle(order);
        const std::size_t n_valid =
            std::max<std::size_t>(1, static_cast<std::size_t>(0.15 * static_cast<double>(rows.size())));
        if (rows.size() < n_valid + 2)
          throw ConfigError("train_predictor: too few rows for GBT early stopping");
        std::vector<std::vector<double>> xt, xv;
        std::vector<double> yt, yv;
        for (std::size_t i = 0; i < order.size(); ++i) {
          if (i < n_valid) {
            xv.push_back(rows[order[i]]);
            yv.push_back(log_y[order[i]]);
          } else {
            xt.push_back(rows[order[i]]);
            yt.push_back(log_y[order[i]]);
          }
        }
        model = fit_gbt(cfg.gbt, xt, yt, &xv, &yv);
      } else {
        model = fit_gbt(cfg.gbt, rows, log_y);
      }
      model.log_target = true;
      p.payload = std::move(model);
      p.log_target = true;
      break;
    }
  }
  return p;
}

std::string predictor_to_container(const TrainedPredictor& p) {
  ordered_json body;
  body["kind"] = std::string(to_string(p.kind));
  body["log1p_features"] = p.log1p_features;
  body["log_target"] = p.log_target;
  body["standardizer"] = p.standardizer ? standardizer_to_json(*p.standardizer) : json(nullptr);
  body["metadata"] = {{"device", p.metadata.device},
                      {"train_fingerprint", p.metadata.train_fingerprint},
                      {"created_at", p.metadata.created_at},
                      {"toolkit_version", p.metadata.toolkit_version}};
  switch (p.kind) {
    case ModelKind::kOls: body["payload"] = ols_to_json(std::get<OlsModel>(p.payload)); break;
    case ModelKind::kMlp: body["payload"] = mlp_to_json(std::get<MlpModel>(p.payload)); break;
    case ModelKind::kSvr: body["payload"] = svr_to_json(std::get<SvrModel>(p.payload)); break;
    case ModelKind::kRf: body["payload"] = rf_to_json(std::get<RfModel>(p.payload)); break;
    case ModelKind::kGbt: body["payload"] = gbt_to_json(std::get<GbtModel>(p.payload)); break;
  }
  const std::string body_text = body.dump();
  char checksum[24];
  std::snprintf(checksum, sizeof(checksum), "%016llx",
                static_cast<unsigned long long>(fnv1a64(body_text)));
  std::string out = std::string(kContainerMagic) + " v" + std::to_string(kContainerVersion) + "\n";
  out += body_text;
  out += "\nchecksum ";
  out += checksum;
  out += "\n";
  return out;
}

TrainedPredictor predictor_from_container(const std::string& text) {
  std::istringstream in(text);
  std::string magic_line;
  if (!std::getline(in, magic_line))
    throw ChecksumError("empty predictor container");
  const std::string expected_prefix = std::string(kContainerMagic) + " v";
  if (magic_line.rfind(expected_prefix, 0) != 0)
    throw ChecksumError("not a predictor container (bad magic line)");
  const int version = std::atoi(magic_line.c_str() + expected_prefix.size());
  if (version != kContainerVersion)
    throw VersionError("container format version " + std::to_string(version) +
                       " is not supported; this toolkit reads version " +
                       std::to_string(kContainerVersion));

  std::string body_text;
  if (!std::getline(in, body_text))
    throw ChecksumError("predictor container truncated: missing payload");
  std::string checksum_line;
  if (!std::getline(in, checksum_line) || checksum_line.rfind("checksum ", 0) != 0)
    throw ChecksumError("predictor container truncated: missing checksum");
  char expected[24];
  std::snprintf(expected, sizeof(expected), "%016llx",
                static_cast<unsigned long long>(fnv1a64(body_text)));
  if (checksum_line.substr(9) != expected)
    throw ChecksumError("predictor container checksum mismatch");

  json body;
  try {
    body = json::parse(body_text);
  } catch (const json::parse_error& e) {
    throw ChecksumError(std::string("predictor container payload is corrupt: ") + e.what());
  }

  TrainedPredictor p;
  p.kind = model_kind_from_string(body.at("kind").get<std::string>());
  p.log1p_features = body.at("log1p_features").get<bool>();
  p.log_target = body.at("log_target").get<bool>();
  if (!body.at("standardizer").is_null())
    p.standardizer = standardizer_from_json(body.at("standardizer"));
  const auto& meta = body.at("metadata");
  p.metadata.device = meta.at("device").get<std::string>();
  p.metadata.train_fingerprint = meta.at("train_fingerprint").get<std::string>();
  p.metadata.created_at = meta.at("created_at").get<std::string>();
  p.metadata.toolkit_version = meta.at("toolkit_version").get<std::string>();
  const auto& payload = body.at("payload");
  switch (p.kind) {
    case ModelKind::kOls: p.payload = ols_from_json(payload); break;
    case ModelKind::kMlp: p.payload = mlp_from_json(payload); break;
    case ModelKind::kSvr: p.payload = svr_from_json(payload); break;
    case ModelKind::kRf: p.payload = rf_from_json(payload); break;
    case ModelKind::kGbt: p.payload = gbt_from_json(payload); break;
  }
  return p;
}

void save_predictor(const TrainedPredictor& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << predictor_to_container(p);
  if (!out) throw IoError("write failed for '" + path + "'");
}

TrainedPredictor load_predictor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return predictor_from_container(buf.str());
}

namespace {

void apply_config_entry(PredictorConfig& cfg, const std::string& key, const json& value) {
  auto as_int = [&](const char* name) {
    if (!value.is_number()) throw ConfigError(std::string("config key '") + name + "' must be a number");
    return value.get<int>();
  };
  auto as_double = [&](const char* name) {
    if (!value.is_number()) throw ConfigError(std::string("config key '") + name + "' must be a number");
    return value.get<double>();
  };
  auto as_u64 = [&](const char* name) {
    if (!value.is_number()) throw ConfigError(std::string("config key '") + name + "' must be a number");
    return value.get<std::uint64_t>();
  };

  switch (cfg.kind) {
    case ModelKind::kOls:
      if (key == "stop_delta") cfg.ols.stop_delta = as_double("stop_delta");
      else if (key == "order") cfg.ols.order = value.get<std::vector<std::string>>();
      else throw ConfigError("unknown OLS config key '" + key + "'");
      return;
    case ModelKind::kMlp:
      if (key == "hidden_layers") cfg.mlp.hidden_layers = value.get<std::vector<int>>();
      else if (key == "activation") cfg.mlp.activation = mlp_activation_from_string(value.get<std::string>());
      else if (key == "learning_rate") cfg.mlp.learning_rate = as_double("learning_rate");
      else if (key == "epochs") cfg.mlp.epochs = as_int("epochs");
      else if (key == "batch_size") cfg.mlp.batch_size = as_int("batch_size");
      else if (key == "seed") cfg.mlp.seed = as_u64("seed");
      else if (key == "momentum") cfg.mlp.momentum = as_double("momentum");
      else throw ConfigError("unknown MLP config key '" + key + "'");
      return;
    case ModelKind::kSvr:
      if (key == "kernel") cfg.svr.kernel = svr_kernel_from_string(value.get<std::string>());
      else if (key == "gamma") cfg.svr.gamma = as_double("gamma");
      else if (key == "degree") cfg.svr.degree = as_int("degree");
      else if (key == "coef0") cfg.svr.coef0 = as_double("coef0");
      else if (key == "cost_c") cfg.svr.cost_c = as_double("cost_c");
      else if (key == "epsilon") cfg.svr.epsilon = as_double("epsilon");
      else if (key == "tolerance") cfg.svr.tolerance = as_double("tolerance");
      else if (key == "max_iterations") cfg.svr.max_iterations = value.get<std::size_t>();
      else throw ConfigError("unknown SVR config key '" + key + "'");
      return;
    case ModelKind::kRf:
      if (key == "n_estimators") cfg.rf.n_estimators = as_int("n_estimators");
      else if (key == "max_depth") {
        const int d = as_int("max_depth");
        cfg.rf.max_depth = d <= 0 ? std::numeric_limits<int>::max() : d;  // <= 0: unbounded
      } else if (key == "min_samples_split") cfg.rf.min_samples_split = as_int("min_samples_split");
      else if (key == "min_samples_leaf") cfg.rf.min_samples_leaf = as_int("min_samples_leaf");
      else if (key == "max_features") cfg.rf.max_features = as_int("max_features");
      else if (key == "seed") cfg.rf.seed = as_u64("seed");
      else if (key == "bootstrap") cfg.rf.bootstrap = value.get<bool>();
      else throw ConfigError("unknown RF config key '" + key + "'");
      return;
    case ModelKind::kGbt:
      if (key == "n_rounds") cfg.gbt.n_rounds = as_int("n_rounds");
      else if (key == "learning_rate") cfg.gbt.learning_rate = as_double("learning_rate");
      else if (key == "max_depth") cfg.gbt.max_depth = as_int("max_depth");
      else if (key == "min_samples_leaf") cfg.gbt.min_samples_leaf = as_int("min_samples_leaf");
      else if (key == "lambda_reg") cfg.gbt.lambda_reg = as_double("lambda_reg");
      else if (key == "subsample") cfg.gbt.subsample = as_double("subsample");
      else if (key == "early_stopping_rounds") cfg.gbt.early_stopping_rounds = as_int("early_stopping_rounds");
      else if (key == "seed") cfg.gbt.seed = as_u64("seed");
      else throw ConfigError("unknown GBT config key '" + key + "'");
      return;
  }
}

}  // namespace

std::string predictor_config_to_json(const PredictorConfig& cfg) {
  ordered_json j;
  j["kind"] = std::string(to_string(cfg.kind));
  switch (cfg.kind) {
    case ModelKind::kOls:
      j["stop_delta"] = cfg.ols.stop_delta;
      if (!cfg.ols.order.empty()) j["order"] = cfg.ols.order;
      break;
    case ModelKind::kMlp:
      j["hidden_layers"] = cfg.mlp.hidden_layers;
      j["activation"] = std::string(to_string(cfg.mlp.activation));
      j["learning_rate"] = cfg.mlp.learning_rate;
      j["epochs"] = cfg.mlp.epochs;
      j["batch_size"] = cfg.mlp.batch_size;
      j["seed"] = cfg.mlp.seed;
      j["momentum"] = cfg.mlp.momentum;
      break;
    case ModelKind::kSvr:
      j["kernel"] = std::string(to_string(cfg.svr.kernel));
      j["gamma"] = cfg.svr.gamma;
      j["degree"] = cfg.svr.degree;
      j["coef0"] = cfg.svr.coef0;
      j["cost_c"] = cfg.svr.cost_c;
      j["epsilon"] = cfg.svr.epsilon;
      j["tolerance"] = cfg.svr.tolerance;
      j["max_iterations"] = cfg.svr.max_iterations;
      break;
    case ModelKind::kRf:
      j["n_estimators"] = cfg.rf.n_estimators;
      j["max_depth"] = cfg.rf.max_depth == std::numeric_limits<int>::max() ? 0 : cfg.rf.max_depth;
      j["min_samples_split"] = cfg.rf.min_samples_split;
      j["min_samples_leaf"] = cfg.rf.min_samples_leaf;
      j["max_features"] = cfg.rf.max_features;
      j["seed"] = cfg.rf.seed;
      j["bootstrap"] = cfg.rf.bootstrap;
      break;
    case ModelKind::kGbt:
      j["n_rounds"] = cfg.gbt.n_rounds;
      j["learning_rate"] = cfg.gbt.learning_rate;
      j["max_depth"] = cfg.gbt.max_depth;
      j["min_samples_leaf"] = cfg.gbt.min_samples_leaf;
      j["lambda_reg"] = cfg.gbt.lambda_reg;
      j["subsample"] = cfg.gbt.subsample;
      j["early_stopping_rounds"] = cfg.gbt.early_stopping_rounds;
      j["seed"] = cfg.gbt.seed;
      break;
  }
  return j.dump(2) + "\n";
}

PredictorConfig predictor_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed predictor config: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("predictor config must be an object with a 'kind' field");
  PredictorConfig cfg;
  cfg.kind = model_kind_from_string(j.at("kind").get<std::string>());
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    apply_config_entry(cfg, key, value);
  }
  return cfg;
}

}  // namespace latproph
