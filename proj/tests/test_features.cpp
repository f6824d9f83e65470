#include "doctest.h"
#include "latproph/errors.hpp"
#include "latproph/features.hpp"
#include "latproph/graph.hpp"
#include "latproph/rng.hpp"
#include "latproph/synthetic.hpp"
#include "latproph/trees.hpp"

using namespace latproph;

namespace {

ModelGraph single_conv_graph(bool bias = false) {
  ModelGraph g;
  g.name = "one-conv";
  g.family = "demo";
  g.variant = "1";
  LayerSpec input;
  input.id = "input";
  input.kind = LayerKind::kInput;
  g.layers.push_back(input);
  LayerSpec conv;
  conv.id = "c1";
  conv.kind = LayerKind::kConv2D;
  conv.inputs = {"input"};
  ConvParams p;
  p.filters = 16;
  p.kernel_h = p.kernel_w = 3;
  p.use_bias = bias;
  conv.params = p;
  g.layers.push_back(conv);
  return g;
}

ModelGraph input_only_graph() {
  ModelGraph g;
  g.name = "empty";
  g.family = "demo";
  g.variant = "0";
  LayerSpec input;
  input.id = "input";
  input.kind = LayerKind::kInput;
  g.layers.push_back(input);
  return g;
}

}  // namespace

TEST_CASE("conv FLOPs: 2*3*3*3*8*8*16 = 55296 on 8x8x3") {
  const FlopBreakdown fb = count_flops(infer_shapes(single_conv_graph(), 8));
  CHECK(fb.conv2d == 55296);
  CHECK(fb.add == 0);
  CHECK(fb.mul == 0);
  CHECK(fb.total == 55296);
}

TEST_CASE("bias adds one FLOP per output element") {
  const FlopBreakdown fb = count_flops(infer_shapes(single_conv_graph(true), 8));
  CHECK(fb.conv2d == 55296 + 8 * 8 * 16);
}

TEST_CASE("input-only graph computes nothing") {
  const FlopBreakdown fb = count_flops(infer_shapes(input_only_graph(), 8));
  CHECK(fb.total == 0);
  const FeatureVector fv = extract_features(infer_shapes(input_only_graph(), 8));
  for (int f = 0; f < kFeatureCount; ++f) {
    if (f == kInputImageSize)
      CHECK(fv[f] == 8.0);
    else
      CHECK(fv[f] == 0.0);
  }
}

TEST_CASE("breakdown booking per layer kind") {
  // input -> conv(16,3x3) -> bn -> relu -> maxpool2 -> add? needs 2 inputs;
  // use avgpool + a dense head instead
  const std::string doc = R"({
    "name": "mix", "family": "demo", "variant": "1",
    "layers": [
      {"id": "input", "kind": "Input"},
      {"id": "c1", "kind": "Conv2D", "inputs": ["input"], "params": {"filters": 4, "kernel": 3}},
      {"id": "bn1", "kind": "BatchNorm", "inputs": ["c1"]},
      {"id": "r1", "kind": "Activation", "inputs": ["bn1"], "params": {"fn": "relu"}},
      {"id": "pmax", "kind": "Pool", "inputs": ["r1"], "params": {"mode": "max", "kernel": 2}},
      {"id": "pavg", "kind": "Pool", "inputs": ["pmax"], "params": {"mode": "avg", "kernel": 2}},
      {"id": "flat", "kind": "Flatten", "inputs": ["pavg"]},
      {"id": "fc", "kind": "Dense", "inputs": ["flat"], "params": {"units": 10, "use_bias": true}}
    ]
  })";
  const ShapedGraph sg = infer_shapes(parse_model(doc), 8);
  const FlopBreakdown fb = count_flops(sg);
  // conv: 2*3*3*3*8*8*4
  CHECK(fb.conv2d == 2 * 27 * 64 * 4);
  // bn: elements to add and to mul; relu: elements to mul
  CHECK(fb.add == 8 * 8 * 4);
  CHECK(fb.mul == 8 * 8 * 4 + 8 * 8 * 4);
  // max pool 2x2 on 4x4x4 out: (4-1)*64; avg pool 2x2 on 2x2x4 out: 4*16
  CHECK(fb.pooling == 3 * 64 + 4 * 16);
  // dense: 2*16*10 + 10
  CHECK(fb.dense == 2 * 16 * 10 + 10);
  CHECK(fb.total == fb.conv2d + fb.add + fb.mul + fb.pooling + fb.dense);
}

TEST_CASE("Add layer books one FLOP per element per extra input") {
  const std::string doc = R"({
    "name": "adder", "family": "demo", "variant": "1",
    "layers": [
      {"id": "input", "kind": "Input"},
      {"id": "a", "kind": "Conv2D", "inputs": ["input"], "params": {"filters": 4, "kernel": 1}},
      {"id": "b", "kind": "Conv2D", "inputs": ["input"], "params": {"filters": 4, "kernel": 1}},
      {"id": "c", "kind": "Conv2D", "inputs": ["input"], "params": {"filters": 4, "kernel": 1}},
      {"id": "sum", "kind": "Add", "inputs": ["a", "b", "c"]}
    ]
  })";
  const FlopBreakdown fb = count_flops(infer_shapes(parse_model(doc), 4));
  CHECK(fb.add == 2 * 4 * 4 * 4);  // two extra inputs
}

TEST_CASE("feature extraction on a dense head: 4 -> Dense(10)") {
  const std::string doc = R"({
    "name": "fc", "family": "demo", "variant": "1",
    "layers": [
      {"id": "input", "kind": "Input"},
      {"id": "gap", "kind": "GlobalPool", "inputs": ["input"], "params": {"mode": "avg"}},
      {"id": "flat", "kind": "Flatten", "inputs": ["gap"]},
      {"id": "fc", "kind": "Dense", "inputs": ["flat"], "params": {"units": 10, "use_bias": true}}
    ]
  })";
  // input 2x2x4? input channels fixed at 3 by default; use input_channels=4
  const ShapedGraph sg = infer_shapes(parse_model(doc), 2, 4);
  const FeatureVector fv = extract_features(sg);
  CHECK(fv[kFcParams] == 4 * 10 + 10);
  CHECK(fv[kFcLayers] == 1);
  CHECK(fv[kConvLayers] == 0);
  CHECK(fv[kWeightedSumNeurons] == 10);
  CHECK(fv[kTotalLayers] == 3);
}

TEST_CASE("single conv features: activations, weighted neurons, parameters") {
  const FeatureVector fv = extract_features(infer_shapes(single_conv_graph(), 8));
  CHECK(fv[kSumActivations] == 1024);          // 8*8*16
  CHECK(fv[kWeightedSumNeurons] == 27648);     // 1024 * 3*3*3
  CHECK(fv[kConvParams] == 432);               // 3*3*3*16
  CHECK(fv[kConvLayers] == 1);
  CHECK(fv[kBnParams] == 0);
  CHECK(fv[kInputImageSize] == 8);
}

TEST_CASE("bn params count 4 per channel") {
  const std::string doc = R"({
    "name": "bn", "family": "demo", "variant": "1",
    "layers": [
      {"id": "input", "kind": "Input"},
      {"id": "c", "kind": "Conv2D", "inputs": ["input"], "params": {"filters": 8, "kernel": 1}},
      {"id": "n", "kind": "BatchNorm", "inputs": ["c"]}
    ]
  })";
  const FeatureVector fv = extract_features(infer_shapes(parse_model(doc), 4));
  CHECK(fv[kBnParams] == 32);
  CHECK(fv[kBnLayers] == 1);
}

TEST_CASE("scaling: doubling input size quadruples activations of stride-1 same nets") {
  const ModelGraph g = single_conv_graph();
  const FeatureVector small = extract_features(infer_shapes(g, 8));
  const FeatureVector big = extract_features(infer_shapes(g, 16));
  CHECK(big[kSumActivations] == 4 * small[kSumActivations]);
  CHECK(big[kConvParams] == small[kConvParams]);       // params size-independent
  CHECK(big[kTotalFlops] == 4 * small[kTotalFlops]);   // conv-only graph
}

TEST_CASE("count_flops additivity: whole-graph count equals the per-layer sum") {
  const ModelGraph resnet = make_resnet(18);
  const ShapedGraph sg = infer_shapes(resnet, 64);
  const FlopBreakdown whole = count_flops(sg);

  // independent per-layer walk over the same shapes
  std::int64_t manual = 0;
  for (const auto& layer : resnet.layers) {
    switch (layer.kind) {
      case LayerKind::kConv2D: {
        const auto& p = layer.conv();
        const TensorShape& in = sg.shape_of(layer.inputs[0]);
        const TensorShape& out = sg.shape_of(layer.id);
        std::int64_t f = 2LL * p.kernel_h * p.kernel_w * (in.c / p.groups) * out.elements();
        if (p.use_bias) f += out.elements();
        manual += f;
        break;
      }
      case LayerKind::kDense: {
        const auto& p = layer.dense();
        manual += 2LL * sg.shape_of(layer.inputs[0]).units * p.units + (p.use_bias ? p.units : 0);
        break;
      }
      case LayerKind::kAdd:
        manual += (static_cast<std::int64_t>(layer.inputs.size()) - 1) *
                  sg.shape_of(layer.id).elements();
        break;
      case LayerKind::kBatchNorm:
        manual += 2 * sg.shape_of(layer.id).elements();
        break;
      case LayerKind::kActivation:
        manual += sg.shape_of(layer.id).elements();
        break;
      case LayerKind::kPool: {
        const auto& p = layer.pool();
        const std::int64_t area = static_cast<std::int64_t>(p.kernel_h) * p.kernel_w;
        manual += (p.mode == PoolMode::kAvg ? area : area - 1) * sg.shape_of(layer.id).elements();
        break;
      }
      case LayerKind::kGlobalPool: {
        const TensorShape& in = sg.shape_of(layer.inputs[0]);
        const std::int64_t area = in.h * in.w;
        manual += (layer.global_pool().mode == PoolMode::kAvg ? area : area - 1) *
                  sg.shape_of(layer.id).elements();
        break;
      }
      default:
        break;
    }
  }
  CHECK(whole.total == manual);
}

TEST_CASE("extract_features is pure and deterministic") {
  const ModelGraph g = make_mobilenet_v2(0.5);
  const ShapedGraph sg = infer_shapes(g, 96);
  const FeatureVector a = extract_features(sg);
  const FeatureVector b = extract_features(sg);
  CHECK(a == b);
}

TEST_CASE("rank_features ordering and errors") {
  SUBCASE("two scored features precede the canonical remainder") {
    const auto order = rank_features({{"total_flops", 100.0}, {"sum_activations", 250.0}});
    REQUIRE(order.size() == kFeatureCount);
    CHECK(order[0] == "sum_activations");
    CHECK(order[1] == "total_flops");
    CHECK(order[2] == "weighted_sum_neurons");  // canonical order resumes
    CHECK(order.back() == "fc_layers");
  }
  SUBCASE("all-equal scores fall back to canonical order") {
    std::map<std::string, double> scores;
    for (const auto& name : feature_names()) scores[name] = 7.0;
    const auto order = rank_features(scores);
    for (int f = 0; f < kFeatureCount; ++f)
      CHECK(order[static_cast<std::size_t>(f)] == feature_names()[static_cast<std::size_t>(f)]);
  }
  SUBCASE("unknown names are rejected") {
    CHECK_THROWS_AS(rank_features({{"latency", 1.0}}), UnknownFeatureError);
  }
}

TEST_CASE("GBT importance on flops-driven data ranks total_flops first") {
  // latency depends only on total_flops; construct rows varying all features
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> row(kFeatureCount);
    for (auto& v : row) v = rng.uniform(0.0, 100.0);
    y.push_back(3.0 * row[kTotalFlops] + 0.001 * rng.normal());
    X.push_back(std::move(row));
  }
  GbtConfig cfg;
  cfg.n_rounds = 30;
  cfg.max_depth = 3;
  cfg.learning_rate = 0.3;
  const GbtModel model = fit_gbt(cfg, X, y);
  const auto scores = feature_importance(model);
  const auto order = rank_features(scores);
  CHECK(order.front() == "total_flops");
}
