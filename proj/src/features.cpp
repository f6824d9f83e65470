#include "latproph/features.hpp"

#include <algorithm>

#include "latproph/errors.hpp"

namespace latproph {

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> kNames = {
      "total_flops",    "sum_activations", "weighted_sum_neurons", "conv_params",
      "total_layers",   "input_image_size", "fc_params",           "bn_params",
      "bn_layers",      "conv_layers",      "fc_layers",
  };
  return kNames;
}

int try_feature_index(const std::string& name) {
  const auto& names = feature_names();
  for (int i = 0; i < kFeatureCount; ++i)
    if (names[static_cast<std::size_t>(i)] == name) return i;
  return -1;
}

int feature_index(const std::string& name) {
  const int idx = try_feature_index(name);
  if (idx < 0) throw UnknownFeatureError("unknown feature '" + name + "'");
  return idx;
}

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b, const std::string& layer_id) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out))
    throw OverflowError("FLOP count overflow at layer '" + layer_id + "'");
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b, const std::string& layer_id) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out))
    throw OverflowError("FLOP count overflow at layer '" + layer_id + "'");
  return out;
}

// Kh*Kw*(Cin/groups)*Cout weights (+ Cout bias)
std::int64_t conv_param_count(const ConvParams& p, std::int64_t in_channels) {
  const std::int64_t weights = static_cast<std::int64_t>(p.kernel_h) * p.kernel_w *
                               (in_channels / p.groups) * p.filters;
  return weights + (p.use_bias ? p.filters : 0);
}

}  // namespace

FlopBreakdown count_flops(const ShapedGraph& sg) {
  FlopBreakdown fb;
  for (const auto& layer : sg.graph.layers) {
    const TensorShape& out = sg.shape_of(layer.id);
    const std::string& id = layer.id;
    switch (layer.kind) {
      case LayerKind::kInput:
      case LayerKind::kFlatten:
      case LayerKind::kConcat:
        break;
      case LayerKind::kConv2D: {
        const auto& p = layer.conv();
        const TensorShape& in = sg.shape_of(layer.inputs[0]);
        std::int64_t macs = checked_mul(static_cast<std::int64_t>(p.kernel_h) * p.kernel_w,
                                        in.c / p.groups, id);
        macs = checked_mul(macs, out.elements(), id);
        std::int64_t flops = checked_mul(macs, 2, id);
        if (p.use_bias) flops = checked_add(flops, out.elements(), id);
        fb.conv2d = checked_add(fb.conv2d, flops, id);
        break;
      }
      case LayerKind::kDense: {
        const auto& p = layer.dense();
        const TensorShape& in = sg.shape_of(layer.inputs[0]);
        std::int64_t flops = checked_mul(checked_mul(in.units, p.units, id), 2, id);
        if (p.use_bias) flops = checked_add(flops, p.units, id);
        fb.dense = checked_add(fb.dense, flops, id);
        break;
      }
      case LayerKind::kAdd: {
        const std::int64_t extra = static_cast<std::int64_t>(layer.inputs.size()) - 1;
        fb.add = checked_add(fb.add, checked_mul(extra, out.elements(), id), id);
        break;
      }
      case LayerKind::kBatchNorm:
        fb.add = checked_add(fb.add, out.elements(), id);
        fb.mul = checked_add(fb.mul, out.elements(), id);
        break;
      case LayerKind::kActivation:
        fb.mul = checked_add(fb.mul, out.elements(), id);
        break;
      case LayerKind::kPool: {
        const auto& p = layer.pool();
        const std::int64_t area = static_cast<std::int64_t>(p.kernel_h) * p.kernel_w;
        const std::int64_t per_elem = p.mode == PoolMode::kAvg ? area : area - 1;
        fb.pooling = checked_add(fb.pooling, checked_mul(per_elem, out.elements(), id), id);
        break;
      }
      case LayerKind::kGlobalPool: {
        const auto& p = layer.global_pool();
        const TensorShape& in = sg.shape_of(layer.inputs[0]);
        const std::int64_t area = checked_mul(in.h, in.w, id);
        const std::int64_t per_elem = p.mode == PoolMode::kAvg ? area : area - 1;
        fb.pooling = checked_add(fb.pooling, checked_mul(per_elem, out.elements(), id), id);
        break;
      }
    }
  }
  fb.total = fb.conv2d;
  fb.total = checked_add(fb.total, fb.add, "total");
  fb.total = checked_add(fb.total, fb.mul, "total");
  fb.total = checked_add(fb.total, fb.pooling, "total");
  fb.total = checked_add(fb.total, fb.dense, "total");
  return fb;
}

FeatureVector extract_features(const ShapedGraph& sg) {
  FeatureVector fv{};
  fv[kTotalFlops] = static_cast<double>(count_flops(sg).total);
  fv[kInputImageSize] = static_cast<double>(sg.input_size);

  for (const auto& layer : sg.graph.layers) {
    if (layer.kind == LayerKind::kInput) continue;
    const TensorShape& out = sg.shape_of(layer.id);
    fv[kTotalLayers] += 1;
    fv[kSumActivations] += static_cast<double>(out.elements());

    switch (layer.kind) {
      case LayerKind::kConv2D: {
        const auto& p = layer.conv();
        const TensorShape& in = sg.shape_of(layer.inputs[0]);
        fv[kConvLayers] += 1;
        fv[kConvParams] += static_cast<double>(conv_param_count(p, in.c));
        // conv neurons = output feature-map elements, weighted by filter volume
        fv[kWeightedSumNeurons] += static_cast<double>(out.elements()) *
                                   static_cast<double>(p.kernel_h) * p.kernel_w *
                                   static_cast<double>(in.c / p.groups);
        break;
      }
      case LayerKind::kDense: {
        const auto& p = layer.dense();
        const TensorShape& in = sg.shape_of(layer.inputs[0]);
        fv[kFcLayers] += 1;
        fv[kFcParams] += static_cast<double>(in.units) * p.units + (p.use_bias ? p.units : 0);
        fv[kWeightedSumNeurons] += static_cast<double>(p.units);  // FC neurons taken as-is
        break;
      }
      case LayerKind::kBatchNorm:
        fv[kBnLayers] += 1;
        fv[kBnParams] += 4.0 * static_cast<double>(out.channels());
        break;
      default:
        break;
    }
  }
  return fv;
}

std::vector<std::string> rank_features(const std::map<std::string, double>& importance) {
  std::vector<std::pair<double, int>> scored;  // (-score, canonical index)
  std::vector<bool> present(kFeatureCount, false);
  for (const auto& [name, score] : importance) {
    const int idx = feature_index(name);
    scored.emplace_back(-score, idx);
    present[static_cast<std::size_t>(idx)] = true;
  }
  std::sort(scored.begin(), scored.end());

  std::vector<std::string> order;
  order.reserve(kFeatureCount);
  for (const auto& [neg_score, idx] : scored) order.push_back(feature_names()[static_cast<std::size_t>(idx)]);
  for (int i = 0; i < kFeatureCount; ++i)
    if (!present[static_cast<std::size_t>(i)]) order.push_back(feature_names()[static_cast<std::size_t>(i)]);
  return order;
}

}  // namespace latproph
