#include "latproph/graph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "latproph/errors.hpp"
#include "nlohmann/json.hpp"

namespace latproph {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kInput: return "Input";
    case LayerKind::kConv2D: return "Conv2D";
    case LayerKind::kDense: return "Dense";
    case LayerKind::kPool: return "Pool";
    case LayerKind::kBatchNorm: return "BatchNorm";
    case LayerKind::kActivation: return "Activation";
    case LayerKind::kAdd: return "Add";
    case LayerKind::kConcat: return "Concat";
    case LayerKind::kFlatten: return "Flatten";
    case LayerKind::kGlobalPool: return "GlobalPool";
  }
  return "?";
}

std::string_view to_string(Padding padding) {
  return padding == Padding::kSame ? "same" : "valid";
}

std::string_view to_string(PoolMode mode) {
  return mode == PoolMode::kMax ? "max" : "avg";
}

std::string_view to_string(ActivationFn fn) {
  switch (fn) {
    case ActivationFn::kRelu: return "relu";
    case ActivationFn::kRelu6: return "relu6";
    case ActivationFn::kSigmoid: return "sigmoid";
    case ActivationFn::kTanh: return "tanh";
    case ActivationFn::kSwish: return "swish";
  }
  return "?";
}

namespace {

LayerKind parse_kind(const std::string& s, const std::string& layer_id) {
  static const std::unordered_map<std::string, LayerKind> kMap = {
      {"Input", LayerKind::kInput},       {"Conv2D", LayerKind::kConv2D},
      {"Dense", LayerKind::kDense},       {"Pool", LayerKind::kPool},
      {"BatchNorm", LayerKind::kBatchNorm}, {"Activation", LayerKind::kActivation},
      {"Add", LayerKind::kAdd},           {"Concat", LayerKind::kConcat},
      {"Flatten", LayerKind::kFlatten},   {"GlobalPool", LayerKind::kGlobalPool},
  };
  const auto it = kMap.find(s);
  if (it == kMap.end())
    throw ValidationError("layer '" + layer_id + "': unknown kind '" + s + "'");
  return it->second;
}

Padding parse_padding(const std::string& s, const std::string& layer_id) {
  if (s == "same") return Padding::kSame;
  if (s == "valid") return Padding::kValid;
  throw ValidationError("layer '" + layer_id + "': unknown padding '" + s + "'");
}

PoolMode parse_pool_mode(const std::string& s, const std::string& layer_id) {
  if (s == "max") return PoolMode::kMax;
  if (s == "avg") return PoolMode::kAvg;
  throw ValidationError("layer '" + layer_id + "': unknown pool mode '" + s + "'");
}

ActivationFn parse_activation_fn(const std::string& s, const std::string& layer_id) {
  if (s == "relu") return ActivationFn::kRelu;
  if (s == "relu6") return ActivationFn::kRelu6;
  if (s == "sigmoid") return ActivationFn::kSigmoid;
  if (s == "tanh") return ActivationFn::kTanh;
  if (s == "swish") return ActivationFn::kSwish;
  throw ValidationError("layer '" + layer_id + "': unknown activation '" + s + "'");
}

// Accepts either a scalar (square) or a [h, w] pair.
std::pair<int, int> parse_extent_pair(const ordered_json& j, const std::string& layer_id,
                                      const char* field) {
  if (j.is_number_integer()) {
    const int v = j.get<int>();
    return {v, v};
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number_integer() && j[1].is_number_integer())
    return {j[0].get<int>(), j[1].get<int>()};
  throw ValidationError("layer '" + layer_id + "': field '" + field +
                        "' must be an integer or a [h, w] pair");
}

int require_int(const ordered_json& params, const std::string& layer_id, const char* field) {
  if (!params.contains(field))
    throw ValidationError("layer '" + layer_id + "': missing required param '" + field + "'");
  if (!params[field].is_number_integer())
    throw ValidationError("layer '" + layer_id + "': param '" + field + "' must be an integer");
  return params[field].get<int>();
}

void check_known_params(const ordered_json& params, const std::string& layer_id,
                        std::initializer_list<const char*> known) {
  for (const auto& [key, value] : params.items()) {
    (void)value;
    if (std::find_if(known.begin(), known.end(),
                     [&key](const char* k) { return key == k; }) == known.end())
      throw ValidationError("layer '" + layer_id + "': unknown param '" + key + "'");
  }
}

LayerParams parse_params(LayerKind kind, const ordered_json& params,
                         const std::string& layer_id) {
  switch (kind) {
    case LayerKind::kConv2D: {
      check_known_params(params, layer_id,
                         {"filters", "kernel", "stride", "padding", "groups", "use_bias"});
      ConvParams p;
      p.filters = require_int(params, layer_id, "filters");
      if (!params.contains("kernel"))
        throw ValidationError("layer '" + layer_id + "': missing required param 'kernel'");
      std::tie(p.kernel_h, p.kernel_w) = parse_extent_pair(params["kernel"], layer_id, "kernel");
      if (params.contains("stride"))
        std::tie(p.stride_h, p.stride_w) = parse_extent_pair(params["stride"], layer_id, "stride");
      if (params.contains("padding"))
        p.padding = parse_padding(params["padding"].get<std::string>(), layer_id);
      if (params.contains("groups")) p.groups = params["groups"].get<int>();
      if (params.contains("use_bias")) p.use_bias = params["use_bias"].get<bool>();
      if (p.filters < 1)
        throw ValidationError("layer '" + layer_id + "': filters must be >= 1");
      if (p.kernel_h < 1 || p.kernel_w < 1)
        throw ValidationError("layer '" + layer_id + "': kernel must be >= 1");
      if (p.stride_h < 1 || p.stride_w < 1)
        throw ValidationError("layer '" + layer_id + "': stride must be >= 1");
      if (p.groups < 1)
        throw ValidationError("layer '" + layer_id + "': groups must be >= 1");
      if (p.filters % p.groups != 0)
        throw ValidationError("layer '" + layer_id + "': groups must divide filters");
      return p;
    }
    case LayerKind::kDense: {
      check_known_params(params, layer_id, {"units", "use_bias"});
      DenseParams p;
      p.units = require_int(params, layer_id, "units");
      if (params.contains("use_bias")) p.use_bias = params["use_bias"].get<bool>();
      if (p.units < 1)
        throw ValidationError("layer '" + layer_id + "': units must be >= 1");
      return p;
    }
    case LayerKind::kPool: {
      check_known_params(params, layer_id, {"mode", "kernel", "stride", "padding"});
      PoolParams p;
      if (params.contains("mode"))
        p.mode = parse_pool_mode(params["mode"].get<std::string>(), layer_id);
      if (!params.contains("kernel"))
        throw ValidationError("layer '" + layer_id + "': missing required param 'kernel'");
      std::tie(p.kernel_h, p.kernel_w) = parse_extent_pair(params["kernel"], layer_id, "kernel");
      if (params.contains("stride")) {
        std::tie(p.stride_h, p.stride_w) = parse_extent_pair(params["stride"], layer_id, "stride");
      } else {
        p.stride_h = p.kernel_h;  // stride defaults to the pool window
        p.stride_w = p.kernel_w;
      }
      if (params.contains("padding"))
        p.padding = parse_padding(params["padding"].get<std::string>(), layer_id);
      if (p.kernel_h < 1 || p.kernel_w < 1)
        throw ValidationError("layer '" + layer_id + "': kernel must be >= 1");
      if (p.stride_h < 1 || p.stride_w < 1)
        throw ValidationError("layer '" + layer_id + "': stride must be >= 1");
      return p;
    }
    case LayerKind::kActivation: {
      check_known_params(params, layer_id, {"fn"});
      ActivationParams p;
      if (!params.contains("fn"))
        throw ValidationError("layer '" + layer_id + "': missing required param 'fn'");
      p.fn = parse_activation_fn(params["fn"].get<std::string>(), layer_id);
      return p;
    }
    case LayerKind::kGlobalPool: {
      check_known_params(params, layer_id, {"mode"});
      GlobalPoolParams p;
      if (params.contains("mode"))
        p.mode = parse_pool_mode(params["mode"].get<std::string>(), layer_id);
      return p;
    }
    case LayerKind::kConcat: {
      // axis is channel-only; an explicit "axis": "channel" is tolerated
      check_known_params(params, layer_id, {"axis"});
      if (params.contains("axis") && params["axis"].get<std::string>() != "channel")
        throw ValidationError("layer '" + layer_id + "': Concat supports only axis 'channel'");
      return std::monostate{};
    }
    default: {
      check_known_params(params, layer_id, {});
      return std::monostate{};
    }
  }
}

ordered_json params_to_json(const LayerSpec& layer) {
  ordered_json j = ordered_json::object();
  switch (layer.kind) {
    case LayerKind::kConv2D: {
      const auto& p = layer.conv();
      j["filters"] = p.filters;
      j["kernel"] = {p.kernel_h, p.kernel_w};
      j["stride"] = {p.stride_h, p.stride_w};
      j["padding"] = std::string(to_string(p.padding));
      j["groups"] = p.groups;
      j["use_bias"] = p.use_bias;
      break;
    }
    case LayerKind::kDense: {
      const auto& p = layer.dense();
      j["units"] = p.units;
      j["use_bias"] = p.use_bias;
      break;
    }
    case LayerKind::kPool: {
      const auto& p = layer.pool();
      j["mode"] = std::string(to_string(p.mode));
      j["kernel"] = {p.kernel_h, p.kernel_w};
      j["stride"] = {p.stride_h, p.stride_w};
      j["padding"] = std::string(to_string(p.padding));
      break;
    }
    case LayerKind::kActivation:
      j["fn"] = std::string(to_string(layer.activation().fn));
      break;
    case LayerKind::kGlobalPool:
      j["mode"] = std::string(to_string(layer.global_pool().mode));
      break;
    default:
      break;
  }
  return j;
}

}  // namespace

const LayerSpec* ModelGraph::find(const std::string& id) const {
  for (const auto& layer : layers)
    if (layer.id == id) return &layer;
  return nullptr;
}

std::string TensorShape::str() const {
  std::ostringstream os;
  if (flat)
    os << "(" << units << ")";
  else
    os << "(" << h << "x" << w << "x" << c << ")";
  return os.str();
}

const TensorShape& ShapedGraph::shape_of(const std::string& id) const {
  return tensor_shapes.at(id);
}

void validate_graph(const ModelGraph& graph) {
  if (graph.layers.empty()) throw ValidationError("graph has no layers");

  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graph.layers.size(); ++i) {
    const auto& layer = graph.layers[i];
    if (layer.id.empty()) throw ValidationError("layer at position " + std::to_string(i) + " has an empty id");
    if (!index.emplace(layer.id, i).second)
      throw ValidationError("duplicate layer id '" + layer.id + "'");
  }

  std::size_t input_count = 0;
  for (const auto& layer : graph.layers) {
    if (layer.kind == LayerKind::kInput) {
      ++input_count;
      if (!layer.inputs.empty())
        throw ValidationError("layer '" + layer.id + "': Input layer must not list inputs");
    } else if (layer.inputs.empty()) {
      throw ValidationError("layer '" + layer.id + "': non-Input layer needs at least one input");
    }
    for (const auto& ref : layer.inputs) {
      if (index.find(ref) == index.end())
        throw ValidationError("layer '" + layer.id + "': references undefined layer '" + ref + "'");
    }
    const std::size_t arity = layer.inputs.size();
    if (layer.kind == LayerKind::kAdd && arity < 2)
      throw ValidationError("layer '" + layer.id + "': Add needs >= 2 inputs");
    if (layer.kind == LayerKind::kConcat && arity < 2)
      throw ValidationError("layer '" + layer.id + "': Concat needs >= 2 inputs");
    if (arity > 1 && layer.kind != LayerKind::kAdd && layer.kind != LayerKind::kConcat)
      throw ValidationError("layer '" + layer.id + "': only Add/Concat take multiple inputs");
  }
  if (input_count == 0) throw ValidationError("graph has no Input layer");
  if (input_count > 1) throw ValidationError("graph has multiple Input layers");

  // cycle check via DFS colouring; reports a layer on the cycle
  enum class Mark { kWhite, kGrey, kBlack };
  std::vector<Mark> marks(graph.layers.size(), Mark::kWhite);
  std::vector<std::pair<std::size_t, std::size_t>> stack;  // (node, next input)
  for (std::size_t start = 0; start < graph.layers.size(); ++start) {
    if (marks[start] != Mark::kWhite) continue;
    stack.emplace_back(start, 0);
    marks[start] = Mark::kGrey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < graph.layers[node].inputs.size()) {
        const std::size_t dep = index.at(graph.layers[node].inputs[next++]);
        if (marks[dep] == Mark::kGrey)
          throw ValidationError("cycle detected through layer '" + graph.layers[dep].id + "'");
        if (marks[dep] == Mark::kWhite) {
          marks[dep] = Mark::kGrey;
          stack.emplace_back(dep, 0);
        }
      } else {
        marks[node] = Mark::kBlack;
        stack.pop_back();
      }
    }
  }

  // reachability: every non-Input layer must (transitively) consume the Input
  std::vector<std::vector<std::size_t>> consumers(graph.layers.size());
  std::size_t input_index = 0;
  for (std::size_t i = 0; i < graph.layers.size(); ++i) {
    if (graph.layers[i].kind == LayerKind::kInput) input_index = i;
    for (const auto& ref : graph.layers[i].inputs) consumers[index.at(ref)].push_back(i);
  }
  std::vector<bool> reachable(graph.layers.size(), false);
  std::deque<std::size_t> queue{input_index};
  reachable[input_index] = true;
  while (!queue.empty()) {
    const std::size_t node = queue.front();
    queue.pop_front();
    for (const std::size_t next : consumers[node]) {
      if (!reachable[next]) {
        reachable[next] = true;
        queue.push_back(next);
      }
    }
  }
  for (std::size_t i = 0; i < graph.layers.size(); ++i) {
    if (!reachable[i])
      throw ValidationError("layer '" + graph.layers[i].id + "' is not reachable from the Input layer");
  }
}

ModelGraph parse_model(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SyntaxError("malformed model document at byte " + std::to_string(e.byte) + ": " + e.what());
  }

  if (!doc.is_object()) throw SyntaxError("model document must be a JSON object");
  for (const char* field : {"name", "family", "variant", "layers"}) {
    if (!doc.contains(field))
      throw SyntaxError(std::string("model document missing field '") + field + "'");
  }
  if (!doc["layers"].is_array()) throw SyntaxError("'layers' must be an array");

  ModelGraph graph;
  graph.name = doc["name"].get<std::string>();
  graph.family = doc["family"].get<std::string>();
  graph.variant = doc["variant"].is_string() ? doc["variant"].get<std::string>()
                                             : doc["variant"].dump();
  for (const auto& jl : doc["layers"]) {
    if (!jl.is_object() || !jl.contains("id") || !jl.contains("kind"))
      throw SyntaxError("every layer needs 'id' and 'kind' fields");
    LayerSpec layer;
    layer.id = jl["id"].get<std::string>();
    layer.kind = parse_kind(jl["kind"].get<std::string>(), layer.id);
    if (jl.contains("inputs")) {
      for (const auto& ref : jl["inputs"]) layer.inputs.push_back(ref.get<std::string>());
    }
    layer.params = parse_params(layer.kind, jl.contains("params") ? jl["params"] : ordered_json::object(),
                                layer.id);
    graph.layers.push_back(std::move(layer));
  }

  validate_graph(graph);
  return graph;
}

std::string serialize_model(const ModelGraph& graph) {
  ordered_json doc;
  doc["name"] = graph.name;
  doc["family"] = graph.family;
  doc["variant"] = graph.variant;
  doc["layers"] = ordered_json::array();
  for (const auto& layer : graph.layers) {
    ordered_json jl;
    jl["id"] = layer.id;
    jl["kind"] = std::string(to_string(layer.kind));
    jl["inputs"] = layer.inputs;
    jl["params"] = params_to_json(layer);
    doc["layers"].push_back(std::move(jl));
  }
  return doc.dump(2) + "\n";
}

std::int64_t conv_output_extent(std::int64_t in, int kernel, int stride, Padding padding) {
  if (padding == Padding::kSame) return (in + stride - 1) / stride;
  return (in - kernel) / stride + 1;  // caller guarantees in >= kernel
}

std::vector<std::size_t> topological_order(const ModelGraph& graph) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graph.layers.size(); ++i) index.emplace(graph.layers[i].id, i);

  std::vector<std::size_t> pending(graph.layers.size());
  std::vector<std::vector<std::size_t>> consumers(graph.layers.size());
  for (std::size_t i = 0; i < graph.layers.size(); ++i) {
    pending[i] = graph.layers[i].inputs.size();
    for (const auto& ref : graph.layers[i].inputs) consumers[index.at(ref)].push_back(i);
  }

  // Kahn's algorithm; the ready set is kept sorted so the order is the
  // declaration order restricted to ready layers.
  std::vector<std::size_t> order;
  order.reserve(graph.layers.size());
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < graph.layers.size(); ++i)
    if (pending[i] == 0) ready.push_back(i);
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end(), std::greater<>());
    const std::size_t node = ready.back();
    ready.pop_back();
    order.push_back(node);
    for (const std::size_t next : consumers[node])
      if (--pending[next] == 0) ready.push_back(next);
  }
  return order;
}

ShapedGraph infer_shapes(const ModelGraph& graph, int input_size, int input_channels) {
  validate_graph(graph);
  if (input_size < 1) throw ShapeError("input_size must be >= 1");
  if (input_channels < 1) throw ShapeError("input_channels must be >= 1");

  ShapedGraph sg;
  sg.graph = graph;
  sg.input_size = input_size;
  sg.input_channels = input_channels;

  const auto order = topological_order(graph);
  for (const std::size_t idx : order) {
    const auto& layer = graph.layers[idx];
    std::vector<const TensorShape*> in;
    in.reserve(layer.inputs.size());
    for (const auto& ref : layer.inputs) in.push_back(&sg.tensor_shapes.at(ref));

    TensorShape out;
    switch (layer.kind) {
      case LayerKind::kInput:
        out = TensorShape::hwc(input_size, input_size, input_channels);
        break;
      case LayerKind::kConv2D: {
        const auto& p = layer.conv();
        const auto& s = *in[0];
        if (s.flat)
          throw ShapeError("layer '" + layer.id + "': Conv2D on flat tensor " + s.str());
        if (p.padding == Padding::kValid && (p.kernel_h > s.h || p.kernel_w > s.w))
          throw ShapeError("layer '" + layer.id + "': kernel (" + std::to_string(p.kernel_h) +
                           "x" + std::to_string(p.kernel_w) + ") larger than input " + s.str());
        if (s.c % p.groups != 0)
          throw ShapeError("layer '" + layer.id + "': groups " + std::to_string(p.groups) +
                           " does not divide input channels of " + s.str());
        out = TensorShape::hwc(conv_output_extent(s.h, p.kernel_h, p.stride_h, p.padding),
                               conv_output_extent(s.w, p.kernel_w, p.stride_w, p.padding),
                               p.filters);
        break;
      }
      case LayerKind::kDense: {
        const auto& s = *in[0];
        if (!s.flat)
          throw ShapeError("layer '" + layer.id + "': Dense fed a non-flattened tensor " + s.str());
        out = TensorShape::vec(layer.dense().units);
        break;
      }
      case LayerKind::kPool: {
        const auto& p = layer.pool();
        const auto& s = *in[0];
        if (s.flat)
          throw ShapeError("layer '" + layer.id + "': Pool on flat tensor " + s.str());
        if (p.padding == Padding::kValid && (p.kernel_h > s.h || p.kernel_w > s.w))
          throw ShapeError("layer '" + layer.id + "': kernel (" + std::to_string(p.kernel_h) +
                           "x" + std::to_string(p.kernel_w) + ") larger than input " + s.str());
        out = TensorShape::hwc(conv_output_extent(s.h, p.kernel_h, p.stride_h, p.padding),
                               conv_output_extent(s.w, p.kernel_w, p.stride_w, p.padding), s.c);
        break;
      }
      case LayerKind::kBatchNorm:
      case LayerKind::kActivation:
        out = *in[0];
        break;
      case LayerKind::kAdd: {
        out = *in[0];
        for (std::size_t i = 1; i < in.size(); ++i) {
          if (!(*in[i] == out))
            throw ShapeError("layer '" + layer.id + "': Add shape mismatch " + out.str() +
                             " vs " + in[i]->str());
        }
        break;
      }
      case LayerKind::kConcat: {
        if (in[0]->flat)
          throw ShapeError("layer '" + layer.id + "': Concat on flat tensor " + in[0]->str());
        std::int64_t channels = in[0]->c;
        for (std::size_t i = 1; i < in.size(); ++i) {
          if (in[i]->flat || in[i]->h != in[0]->h || in[i]->w != in[0]->w)
            throw ShapeError("layer '" + layer.id + "': Concat H/W mismatch " + in[0]->str() +
                             " vs " + in[i]->str());
          channels += in[i]->c;
        }
        out = TensorShape::hwc(in[0]->h, in[0]->w, channels);
        break;
      }
      case LayerKind::kFlatten:
        out = TensorShape::vec(in[0]->elements());
        break;
      case LayerKind::kGlobalPool: {
        const auto& s = *in[0];
        if (s.flat)
          throw ShapeError("layer '" + layer.id + "': GlobalPool on flat tensor " + s.str());
        out = TensorShape::vec(s.c);
        break;
      }
    }
    if (out.elements() < 1)
      throw ShapeError("layer '" + layer.id + "': degenerate output shape " + out.str());
    sg.tensor_shapes.emplace(layer.id, out);
  }
  return sg;
}

}  // namespace latproph
