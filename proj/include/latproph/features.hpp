#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "latproph/graph.hpp"

namespace latproph {

// Canonical feature order, most- to least-important. Every FeatureVector,
// CSV column block and standardizer follows this order.
enum Feature : int {
  kTotalFlops = 0,
  kSumActivations,
  kWeightedSumNeurons,
  kConvParams,
  kTotalLayers,
  kInputImageSize,
  kFcParams,
  kBnParams,
  kBnLayers,
  kConvLayers,
  kFcLayers,
  kFeatureCount,
};

using FeatureVector = std::array<double, kFeatureCount>;

const std::array<std::string, kFeatureCount>& feature_names();

// Index of `name` in the canonical order; throws UnknownFeatureError.
int feature_index(const std::string& name);

// As feature_index, but returns -1 for unknown names.
int try_feature_index(const std::string& name);

// Per-category FLOP counts (batch size 1, multiply-accumulate = 2 FLOPs).
struct FlopBreakdown {
  std::int64_t conv2d = 0;
  std::int64_t add = 0;
  std::int64_t mul = 0;
  std::int64_t pooling = 0;
  std::int64_t dense = 0;
  std::int64_t total = 0;
};

// Booking rules:
//   Conv2D  2*Kh*Kw*(Cin/groups)*Hout*Wout*Cout (+ Hout*Wout*Cout bias)
//   Dense   2*in*out (+ out bias)
//   Add     (inputs-1) * elements                      -> add
//   BatchNorm  elements -> add, elements -> mul
//   Activation elements                                -> mul
//   Pool    kernel_area*out_elements (avg)
//           (kernel_area-1)*out_elements (max)         -> pooling
// GlobalPool counts as a pool whose window is the whole feature map.
// Throws OverflowError if any count leaves the int64 range.
FlopBreakdown count_flops(const ShapedGraph& sg);

FeatureVector extract_features(const ShapedGraph& sg);

// Features sorted by descending F-score; ties and absent features fall back
// to canonical order (absent ones last).
std::vector<std::string> rank_features(const std::map<std::string, double>& importance);

}  // namespace latproph
