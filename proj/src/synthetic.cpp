#include "latproph/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "latproph/common.hpp"
#include "latproph/errors.hpp"
#include "latproph/features.hpp"
#include "latproph/rng.hpp"
#include "nlohmann/json.hpp"

namespace latproph {

namespace {

// Incremental graph assembly used by every builder below.
class GraphAssembler {
 public:
  GraphAssembler(std::string name, std::string family, std::string variant) {
    graph_.name = std::move(name);
    graph_.family = std::move(family);
    graph_.variant = std::move(variant);
    LayerSpec input;
    input.id = "input";
    input.kind = LayerKind::kInput;
    graph_.layers.push_back(std::move(input));
    head_ = "input";
  }

  const std::string& head() const { return head_; }
  void set_head(std::string id) { head_ = std::move(id); }

  std::string conv(int filters, int kernel, int stride, const std::string& from = "",
                   int groups = 1, bool bias = false, Padding padding = Padding::kSame) {
    ConvParams p;
    p.filters = filters;
    p.kernel_h = p.kernel_w = kernel;
    p.stride_h = p.stride_w = stride;
    p.padding = padding;
    p.groups = groups;
    p.use_bias = bias;
    return add_layer(LayerKind::kConv2D, p, {from.empty() ? head_ : from}, "conv");
  }

  std::string bn(const std::string& from = "") {
    return add_layer(LayerKind::kBatchNorm, std::monostate{}, {from.empty() ? head_ : from}, "bn");
  }

  std::string act(ActivationFn fn = ActivationFn::kRelu, const std::string& from = "") {
    ActivationParams p{fn};
    return add_layer(LayerKind::kActivation, p, {from.empty() ? head_ : from}, "act");
  }

  std::string pool(PoolMode mode, int kernel, int stride, Padding padding,
                   const std::string& from = "") {
    PoolParams p;
    p.mode = mode;
    p.kernel_h = p.kernel_w = kernel;
    p.stride_h = p.stride_w = stride;
    p.padding = padding;
    return add_layer(LayerKind::kPool, p, {from.empty() ? head_ : from}, "pool");
  }

  std::string add(const std::vector<std::string>& from) {
    return add_layer(LayerKind::kAdd, std::monostate{}, from, "add");
  }

  std::string concat(const std::vector<std::string>& from) {
    return add_layer(LayerKind::kConcat, std::monostate{}, from, "concat");
  }

  std::string global_pool(PoolMode mode = PoolMode::kAvg) {
    GlobalPoolParams p{mode};
    return add_layer(LayerKind::kGlobalPool, p, {head_}, "gap");
  }

  std::string flatten() {
    return add_layer(LayerKind::kFlatten, std::monostate{}, {head_}, "flatten");
  }

  std::string dense(int units, bool bias = true) {
    DenseParams p;
    p.units = units;
    p.use_bias = bias;
    return add_layer(LayerKind::kDense, p, {head_}, "fc");
  }

  ModelGraph finish() {
    validate_graph(graph_);
    return std::move(graph_);
  }

 private:
  std::string add_layer(LayerKind kind, LayerParams params, const std::vector<std::string>& inputs,
                        const char* prefix) {
    LayerSpec layer;
    layer.id = std::string(prefix) + std::to_string(++counters_[prefix]);
    layer.kind = kind;
    layer.inputs = inputs;
    layer.params = std::move(params);
    graph_.layers.push_back(layer);
    head_ = layer.id;
    return head_;
  }

  ModelGraph graph_;
  std::string head_;
  std::map<std::string, int> counters_;
};

int make_divisible_8(double v) {
  int out = std::max(8, static_cast<int>(v + 4.0) / 8 * 8);
  if (static_cast<double>(out) < 0.9 * v) out += 8;
  return out;
}

}  // namespace

ModelGraph make_resnet(int depth) {
  struct StageSpec {
    bool bottleneck;
    std::array<int, 4> blocks;
  };
  StageSpec spec{};
  switch (depth) {
    case 18: spec = {false, {2, 2, 2, 2}}; break;
    case 26: spec = {true, {2, 2, 2, 2}}; break;
    case 34: spec = {false, {3, 4, 6, 3}}; break;
    case 50: spec = {true, {3, 4, 6, 3}}; break;
    case 101: spec = {true, {3, 4, 23, 3}}; break;
    case 152: spec = {true, {3, 8, 36, 3}}; break;
    default: throw ConfigError("make_resnet: unsupported depth " + std::to_string(depth));
  }

  GraphAssembler g("resnet_v1-" + std::to_string(depth), "resnet_v1", std::to_string(depth));
  g.conv(64, 7, 2);
  g.bn();
  g.act();
  g.pool(PoolMode::kMax, 3, 2, Padding::kSame);

  const int planes_per_stage[4] = {64, 128, 256, 512};
  const int expansion = spec.bottleneck ? 4 : 1;
  int in_channels = 64;
  for (int stage = 0; stage < 4; ++stage) {
    const int planes = planes_per_stage[stage];
    const int out_channels = planes * expansion;
    for (int block = 0; block < spec.blocks[static_cast<std::size_t>(stage)]; ++block) {
      const int stride = (block == 0 && stage > 0) ? 2 : 1;
      const std::string residual_in = g.head();

      if (spec.bottleneck) {
        g.conv(planes, 1, stride);
        g.bn();
        g.act();
        g.conv(planes, 3, 1);
        g.bn();
        g.act();
        g.conv(out_channels, 1, 1);
      } else {
        g.conv(planes, 3, stride);
        g.bn();
        g.act();
        g.conv(planes, 3, 1);
      }
      const std::string main_branch = g.bn();

      std::string shortcut = residual_in;
      if (block == 0 && (stride != 1 || in_channels != out_channels)) {
        g.conv(out_channels, 1, stride, residual_in);
        shortcut = g.bn();
      }
      g.add({main_branch, shortcut});
      g.act();
      in_channels = out_channels;
    }
  }
  g.global_pool();
  g.dense(1000);
  return g.finish();
}

ModelGraph make_densenet(int depth) {
  std::array<int, 4> blocks{};
  switch (depth) {
    case 121: blocks = {6, 12, 24, 16}; break;
    case 169: blocks = {6, 12, 32, 32}; break;
    case 201: blocks = {6, 12, 48, 32}; break;
    case 264: blocks = {6, 12, 64, 48}; break;
    default: throw ConfigError("make_densenet: unsupported depth " + std::to_string(depth));
  }
  const int growth = 32;

  GraphAssembler g("densenet-" + std::to_string(depth), "densenet", std::to_string(depth));
  g.conv(64, 7, 2);
  g.bn();
  g.act();
  g.pool(PoolMode::kMax, 3, 2, Padding::kSame);

  int channels = 64;
  for (int stage = 0; stage < 4; ++stage) {
    for (int layer = 0; layer < blocks[static_cast<std::size_t>(stage)]; ++layer) {
      const std::string block_in = g.head();
      g.conv(4 * growth, 1, 1, block_in);
      g.bn();
      g.act();
      g.conv(growth, 3, 1);
      g.bn();
      const std::string fresh = g.act();
      g.concat({block_in, fresh});
      channels += growth;
    }
    if (stage < 3) {
      channels /= 2;  // 0.5 compression
      g.conv(channels, 1, 1);
      g.bn();
      g.act();
      g.pool(PoolMode::kAvg, 2, 2, Padding::kValid);
    }
  }
  g.bn();
  g.act();
  g.global_pool();
  g.dense(1000);
  return g.finish();
}

ModelGraph make_mobilenet_v1(double width) {
  auto scaled = [width](int f) { return std::max(8, static_cast<int>(std::lround(f * width))); };
  std::string variant = std::to_string(static_cast<int>(std::lround(width * 100)));

  GraphAssembler g("mobilenet_v1-" + variant, "mobilenet_v1", variant);
  g.conv(scaled(32), 3, 2);
  g.bn();
  g.act();

  const std::pair<int, int> stages[] = {{64, 1},  {128, 2}, {128, 1}, {256, 2}, {256, 1},
                                        {512, 2}, {512, 1}, {512, 1}, {512, 1}, {512, 1},
                                        {512, 1}, {1024, 2}, {1024, 1}};
  int channels = scaled(32);
  for (const auto& [filters, stride] : stages) {
    g.conv(channels, 3, stride, "", channels);  // depthwise
    g.bn();
    g.act();
    g.conv(scaled(filters), 1, 1);  // pointwise
    g.bn();
    g.act();
    channels = scaled(filters);
  }
  g.global_pool();
  g.dense(1000);
  return g.finish();
}

ModelGraph make_mobilenet_v2(double width) {
  std::string variant = std::to_string(static_cast<int>(std::lround(width * 100)));

  GraphAssembler g("mobilenet_v2-" + variant, "mobilenet_v2", variant);
  int channels = make_divisible_8(32 * width);
  g.conv(channels, 3, 2);
  g.bn();
  g.act(ActivationFn::kRelu6);

  struct BlockSpec {
    int expand;
    int filters;
    int repeats;
    int stride;
  };
  const BlockSpec specs[] = {{1, 16, 1, 1},  {6, 24, 2, 2},  {6, 32, 3, 2}, {6, 64, 4, 2},
                             {6, 96, 3, 1},  {6, 160, 3, 2}, {6, 320, 1, 1}};
  for (const auto& spec : specs) {
    const int out_channels = make_divisible_8(spec.filters * width);
    for (int r = 0; r < spec.repeats; ++r) {
      const int stride = r == 0 ? spec.stride : 1;
      const std::string block_in = g.head();
      int expanded = channels;
      if (spec.expand != 1) {
        expanded = channels * spec.expand;
        g.conv(expanded, 1, 1);
        g.bn();
        g.act(ActivationFn::kRelu6);
      }
      g.conv(expanded, 3, stride, "", expanded);  // depthwise
      g.bn();
      g.act(ActivationFn::kRelu6);
      g.conv(out_channels, 1, 1);
      const std::string projected = g.bn();
      if (stride == 1 && channels == out_channels) g.add({block_in, projected});
      channels = out_channels;
    }
  }
  const int head_channels = width > 1.0 ? make_divisible_8(1280 * width) : 1280;
  g.conv(head_channels, 1, 1);
  g.bn();
  g.act(ActivationFn::kRelu6);
  g.global_pool();
  g.dense(1000);
  return g.finish();
}

ModelGraph make_plain_cnn(int depth) {
  std::array<int, 5> convs_per_stage{};
  switch (depth) {
    case 11: convs_per_stage = {1, 1, 2, 2, 2}; break;
    case 13: convs_per_stage = {2, 2, 2, 2, 2}; break;
    case 16: convs_per_stage = {2, 2, 3, 3, 3}; break;
    case 19: convs_per_stage = {2, 2, 4, 4, 4}; break;
    default: throw ConfigError("make_plain_cnn: unsupported depth " + std::to_string(depth));
  }
  const int stage_channels[5] = {64, 128, 256, 512, 512};

  GraphAssembler g("plain_cnn-" + std::to_string(depth), "plain_cnn", std::to_string(depth));
  for (int stage = 0; stage < 5; ++stage) {
    for (int c = 0; c < convs_per_stage[static_cast<std::size_t>(stage)]; ++c) {
      g.conv(stage_channels[stage], 3, 1, "", 1, /*bias=*/true);
      g.act();
    }
    g.pool(PoolMode::kMax, 2, 2, Padding::kValid);
  }
  g.global_pool();
  g.dense(1000);
  return g.finish();
}

ModelGraph generate_cnn(const SynthConfig& cfg, int index) {
  if (index < 0 || index >= cfg.n_models)
    throw ConfigError("generate_cnn: index " + std::to_string(index) + " out of range");
  if (cfg.input_sizes.empty()) throw ConfigError("generate_cnn: empty input size set");
  if (cfg.min_depth < 1 || cfg.max_depth < cfg.min_depth)
    throw ConfigError("generate_cnn: invalid depth range");

  for (int attempt = 0; attempt < 100; ++attempt) {
    Rng rng(mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(index)),
                     static_cast<std::uint64_t>(attempt)));
    const std::string variant = std::to_string(index);
    GraphAssembler g("synthetic-" + variant, "synthetic", variant);

    // constructive legality: every spatial op uses "same" padding, strides
    // drop to 1 once the smallest configured input is exhausted
    std::int64_t min_spatial = *std::min_element(cfg.input_sizes.begin(), cfg.input_sizes.end());
    const int depth = cfg.min_depth +
                      static_cast<int>(rng.uniform_int(cfg.max_depth - cfg.min_depth + 1));
    int channels = 3;

    auto pick_filters = [&](int lo, int hi) {
      return lo + static_cast<int>(rng.uniform_int(std::max(1, hi - lo + 1)));
    };
    auto pick_stride = [&]() {
      const int s = rng.pick(cfg.stride_set);
      return min_spatial >= 2 ? s : 1;
    };
    auto maybe_bn = [&](double p = 0.8) {
      if (cfg.batchnorm && rng.uniform() < p) g.bn();
    };

    // stem
    {
      const int filters = pick_filters(cfg.min_filters, std::min(cfg.max_filters, 64));
      const int kernel = rng.pick(cfg.kernel_set);
      const int stride = pick_stride();
      g.conv(filters, kernel, stride);
      min_spatial = (min_spatial + stride - 1) / stride;
      maybe_bn();
      g.act();
      channels = filters;
    }

    for (int block = 1; block < depth; ++block) {
      enum class BlockKind { kPlain, kDepthwise, kResidual };
      std::vector<BlockKind> choices{BlockKind::kPlain};
      if (cfg.depthwise_blocks) choices.push_back(BlockKind::kDepthwise);
      if (cfg.residual_blocks) choices.push_back(BlockKind::kResidual);
      const BlockKind kind = choices[static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(choices.size())))];

      const int filters = pick_filters(cfg.min_filters, cfg.max_filters);
      switch (kind) {
        case BlockKind::kPlain: {
          const int kernel = rng.pick(cfg.kernel_set);
          const int stride = pick_stride();
          g.conv(filters, kernel, stride);
          min_spatial = (min_spatial + stride - 1) / stride;
          maybe_bn();
          g.act();
          channels = filters;
          break;
        }
        case BlockKind::kDepthwise: {
          const int kernel = rng.pick(cfg.kernel_set);
          const int stride = pick_stride();
          g.conv(channels, kernel, stride, "", channels);
          min_spatial = (min_spatial + stride - 1) / stride;
          maybe_bn();
          g.act();
          g.conv(filters, 1, 1);
          maybe_bn();
          g.act();
          channels = filters;
          break;
        }
        case BlockKind::kResidual: {
          const std::string block_in = g.head();
          g.conv(filters, 3, 1);
          maybe_bn();
          g.act();
          g.conv(filters, 3, 1);
          const std::string main_branch = cfg.batchnorm ? g.bn() : g.head();
          std::string shortcut = block_in;
          if (channels != filters) shortcut = g.conv(filters, 1, 1, block_in);
          g.add({main_branch, shortcut});
          g.act();
          channels = filters;
          break;
        }
      }

      if (cfg.pooling && min_spatial >= 2 && rng.uniform() < 0.2) {
        const PoolMode mode = rng.uniform() < 0.5 ? PoolMode::kMax : PoolMode::kAvg;
        g.pool(mode, 2, 2, Padding::kSame);
        min_spatial = (min_spatial + 1) / 2;
      }
    }

    g.global_pool();
    if (rng.uniform() < 0.5) {
      g.dense(pick_filters(cfg.min_fc_width, cfg.max_fc_width));
      g.act();
    }
    g.dense(10 + static_cast<int>(rng.uniform_int(991)));

    ModelGraph graph = g.finish();
    bool valid = true;
    for (const int size : cfg.input_sizes) {
      try {
        infer_shapes(graph, size);
      } catch (const Error&) {
        valid = false;
        break;
      }
    }
    if (valid) return graph;
  }
  throw GenerationRetryExceeded("generate_cnn: no valid graph after 100 attempts for index " +
                                std::to_string(index));
}

double synth_latency(const FeatureVector& fv, const DeviceProfile& dp, std::uint64_t noise_seed) {
  const double base = dp.c_flops * fv[kTotalFlops] + dp.c_activations * fv[kSumActivations] +
                      dp.c_weighted_neurons * fv[kWeightedSumNeurons] +
                      dp.c_params * (fv[kConvParams] + fv[kFcParams]) +
                      dp.c_layers * fv[kTotalLayers] +
                      dp.c_cross * std::sqrt(fv[kTotalFlops] * fv[kSumActivations]);
  double eps = 0.0;
  if (dp.noise_cv > 0.0) {
    Rng rng(mix_seed(noise_seed, 11));
    double z = rng.normal();
    while (std::abs(z) > 3.0) z = rng.normal();  // truncate, keep |eps| <= 3 cv
    eps = dp.noise_cv * z;
  }
  return std::max(base * (1.0 + eps), 1e-6);
}

DeviceProfile agx_like_profile() {
  // balanced so compute, memory-proxy and the nonlinear cross term all carry
  // real weight (a resnet-50 at 224 lands near 50 ms)
  DeviceProfile dp;
  dp.name = "agx-like";
  dp.c_flops = 1.5e-9;
  dp.c_activations = 2.0e-7;
  dp.c_weighted_neurons = 1.0e-9;
  dp.c_params = 2.0e-7;
  dp.c_layers = 0.003;
  dp.c_cross = 3.0e-8;
  dp.noise_cv = 0.05;
  return dp;
}

DeviceProfile tx2_like_profile() {
  // slower device, heavier memory pressure (weaker bandwidth), same shape
  DeviceProfile dp;
  dp.name = "tx2-like";
  dp.c_flops = 3.5e-9;
  dp.c_activations = 7.0e-7;
  dp.c_weighted_neurons = 2.5e-9;
  dp.c_params = 5.0e-7;
  dp.c_layers = 0.008;
  dp.c_cross = 8.0e-8;
  dp.noise_cv = 0.05;
  return dp;
}

std::string device_profiles_to_json(const std::vector<DeviceProfile>& profiles) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& dp : profiles) {
    out.push_back({{"name", dp.name},
                   {"c_flops", dp.c_flops},
                   {"c_activations", dp.c_activations},
                   {"c_weighted_neurons", dp.c_weighted_neurons},
                   {"c_params", dp.c_params},
                   {"c_layers", dp.c_layers},
                   {"c_cross", dp.c_cross},
                   {"noise_cv", dp.noise_cv}});
  }
  return out.dump(2) + "\n";
}

std::vector<DeviceProfile> device_profiles_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("malformed profile file: ") + e.what());
  }
  if (!j.is_array() || j.empty()) throw ConfigError("profile file must be a non-empty array");
  std::vector<DeviceProfile> profiles;
  for (const auto& item : j) {
    DeviceProfile dp;
    dp.name = item.at("name").get<std::string>();
    dp.c_flops = item.at("c_flops").get<double>();
    dp.c_activations = item.at("c_activations").get<double>();
    dp.c_weighted_neurons = item.at("c_weighted_neurons").get<double>();
    dp.c_params = item.at("c_params").get<double>();
    dp.c_layers = item.at("c_layers").get<double>();
    dp.c_cross = item.at("c_cross").get<double>();
    dp.noise_cv = item.value("noise_cv", 0.05);
    bool positive = dp.c_flops > 0 || dp.c_activations > 0 || dp.c_weighted_neurons > 0 ||
                    dp.c_params > 0 || dp.c_layers > 0 || dp.c_cross > 0;
    if (!positive || dp.c_flops < 0 || dp.c_activations < 0 || dp.c_weighted_neurons < 0 ||
        dp.c_params < 0 || dp.c_layers < 0 || dp.c_cross < 0)
      throw ConfigError("profile '" + dp.name + "': coefficients must be >= 0, at least one > 0");
    if (dp.noise_cv < 0.0 || dp.noise_cv > 0.5)
      throw ConfigError("profile '" + dp.name + "': noise_cv must be in [0, 0.5]");
    profiles.push_back(std::move(dp));
  }
  return profiles;
}

std::vector<CorpusEntry> corpus_entries(const SynthConfig& cfg) {
  // every family shares cfg.input_sizes: held-out families then stay inside
  // the feature ranges the remaining families (notably the synthetic ones)
  // cover, keeping the NCA space an interpolation problem
  const std::vector<int>& sizes = cfg.input_sizes;

  std::vector<CorpusEntry> entries;
  for (const int depth : {18, 26, 34, 50, 101, 152})
    entries.push_back({make_resnet(depth), sizes});
  for (const double width : {0.25, 0.5, 0.75, 1.0})
    entries.push_back({make_mobilenet_v1(width), sizes});
  for (const double width : {0.35, 0.5, 0.75, 1.0, 1.4})
    entries.push_back({make_mobilenet_v2(width), sizes});
  for (const int depth : {121, 169, 201, 264})
    entries.push_back({make_densenet(depth), sizes});
  for (const int depth : {11, 13, 16, 19})
    entries.push_back({make_plain_cnn(depth), sizes});
  for (int index = 0; index < cfg.n_models; ++index)
    entries.push_back({generate_cnn(cfg, index), sizes});
  return entries;
}

std::vector<Dataset> build_synth_corpus(const SynthConfig& cfg,
                                        const std::vector<DeviceProfile>& profiles) {
  const auto entries = corpus_entries(cfg);

  std::vector<Dataset> datasets(profiles.size());
  for (std::size_t p = 0; p < profiles.size(); ++p) datasets[p].device = profiles[p].name;

  std::size_t record_index = 0;
  for (const auto& entry : entries) {
    for (const int size : entry.input_sizes) {
      const ShapedGraph sg = infer_shapes(entry.graph, size);
      const FeatureVector fv = extract_features(sg);
      for (std::size_t p = 0; p < profiles.size(); ++p) {
        const DeviceProfile& dp = profiles[p];
        MeasurementRecord r;
        r.model_name = entry.graph.name;
        r.family = entry.graph.family;
        r.variant = entry.graph.variant;
        r.input_size = size;
        r.device = dp.name;
        r.replicates = 100;
        r.features = fv;
        const std::uint64_t noise_seed =
            mix_seed(mix_seed(cfg.seed, fnv1a64(dp.name)), record_index);
        r.latency_ms = synth_latency(fv, dp, noise_seed);
        r.latency_std_ms = dp.noise_cv * r.latency_ms;
        datasets[p].records.push_back(std::move(r));
      }
      ++record_index;
    }
  }
  for (auto& ds : datasets) validate_dataset(ds);
  return datasets;
}

}  // namespace latproph
