#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace latproph {

enum class LayerKind {
  kInput,
  kConv2D,
  kDense,
  kPool,
  kBatchNorm,
  kActivation,
  kAdd,
  kConcat,
  kFlatten,
  kGlobalPool,
};

enum class Padding { kSame, kValid };
enum class PoolMode { kMax, kAvg };
enum class ActivationFn { kRelu, kRelu6, kSigmoid, kTanh, kSwish };

std::string_view to_string(LayerKind kind);
std::string_view to_string(Padding padding);
std::string_view to_string(PoolMode mode);
std::string_view to_string(ActivationFn fn);

struct ConvParams {
  int filters = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride_h = 1;
  int stride_w = 1;
  Padding padding = Padding::kSame;
  int groups = 1;
  bool use_bias = false;
};

struct DenseParams {
  int units = 1;
  bool use_bias = true;
};

struct PoolParams {
  PoolMode mode = PoolMode::kMax;
  int kernel_h = 2;
  int kernel_w = 2;
  int stride_h = 2;
  int stride_w = 2;
  Padding padding = Padding::kValid;
};

struct ActivationParams {
  ActivationFn fn = ActivationFn::kRelu;
};

struct GlobalPoolParams {
  PoolMode mode = PoolMode::kAvg;
};

using LayerParams = std::variant<std::monostate, ConvParams, DenseParams,
                                 PoolParams, ActivationParams, GlobalPoolParams>;

struct LayerSpec {
  std::string id;
  LayerKind kind = LayerKind::kInput;
  std::vector<std::string> inputs;
  LayerParams params;

  const ConvParams& conv() const { return std::get<ConvParams>(params); }
  const DenseParams& dense() const { return std::get<DenseParams>(params); }
  const PoolParams& pool() const { return std::get<PoolParams>(params); }
  const ActivationParams& activation() const { return std::get<ActivationParams>(params); }
  const GlobalPoolParams& global_pool() const { return std::get<GlobalPoolParams>(params); }
};

// A CNN architecture as a layer DAG. Immutable after construction; validated
// by parse_model / validate_graph before use.
struct ModelGraph {
  std::string name;
  std::string family;
  std::string variant;
  std::vector<LayerSpec> layers;

  const LayerSpec* find(const std::string& id) const;
};

// Either a rank-3 feature map (h, w, c) or a flat vector of `units`
// (post-Flatten / GlobalPool / Dense).
struct TensorShape {
  bool flat = false;
  std::int64_t h = 0;
  std::int64_t w = 0;
  std::int64_t c = 0;
  std::int64_t units = 0;

  static TensorShape hwc(std::int64_t h, std::int64_t w, std::int64_t c) {
    return TensorShape{false, h, w, c, 0};
  }
  static TensorShape vec(std::int64_t units) {
    return TensorShape{true, 0, 0, 0, units};
  }
  std::int64_t elements() const { return flat ? units : h * w * c; }
  std::int64_t channels() const { return flat ? units : c; }

  bool operator==(const TensorShape&) const = default;
  std::string str() const;
};

struct ShapedGraph {
  ModelGraph graph;
  int input_size = 0;
  int input_channels = 3;
  std::map<std::string, TensorShape> tensor_shapes;

  const TensorShape& shape_of(const std::string& id) const;
};

// Throws ValidationError naming the offending layer id when any ModelGraph
// invariant fails (duplicate id, dangling reference, cycle, Input count,
// Add/Concat arity, parameter ranges).
void validate_graph(const ModelGraph& graph);

// Parses a model-description document (JSON; see docs/model_format.md).
// Throws SyntaxError with byte position for malformed documents and
// ValidationError for structurally invalid graphs.
ModelGraph parse_model(const std::string& text);

// Inverse of parse_model up to formatting; parse(serialize(g)) == g.
std::string serialize_model(const ModelGraph& graph);

// conv/pool output spatial size: floor((in + pad_total - kernel)/stride) + 1,
// with "same" choosing pad_total so the output is ceil(in/stride).
std::int64_t conv_output_extent(std::int64_t in, int kernel, int stride, Padding padding);

// Assigns a shape to every layer. Throws ShapeError naming the layer and the
// offending shapes (kernel too large, Add mismatch, Concat H/W mismatch,
// Dense on a non-flat tensor, groups not dividing channels).
ShapedGraph infer_shapes(const ModelGraph& graph, int input_size, int input_channels = 3);

// Layer ids in a deterministic topological order (declaration order among
// ready layers).
std::vector<std::size_t> topological_order(const ModelGraph& graph);

}  // namespace latproph
