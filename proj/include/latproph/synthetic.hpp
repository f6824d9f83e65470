#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latproph/dataset.hpp"
#include "latproph/graph.hpp"

namespace latproph {

struct SynthConfig {
  std::uint64_t seed = 0;
  int n_models = 64;
  int min_depth = 3;   // randomly generated conv blocks, inclusive
  int max_depth = 12;
  int min_filters = 8;
  int max_filters = 256;
  std::vector<int> kernel_set{1, 3, 5, 7};
  std::vector<int> stride_set{1, 2};
  bool residual_blocks = true;
  bool depthwise_blocks = true;
  bool batchnorm = true;
  bool pooling = true;
  std::vector<int> input_sizes{32,  56,  64,  75,  90,  112, 128, 150, 224, 240, 256, 299,
                               320, 331, 448, 480, 512, 568, 600, 720, 800, 896, 1024};
  int min_fc_width = 16;
  int max_fc_width = 512;
};

// Coefficients of the synthetic latency law; stands in for a profiled edge
// GPU so the pipeline runs without hardware.
struct DeviceProfile {
  std::string name;
  double c_flops = 0.0;             // ms per FLOP
  double c_activations = 0.0;       // ms per intermediate tensor element
  double c_weighted_neurons = 0.0;  // ms per filter-weighted neuron
  double c_params = 0.0;            // ms per conv/fc parameter
  double c_layers = 0.0;            // ms per layer
  double c_cross = 0.0;             // ms per sqrt(flops * activations)
  double noise_cv = 0.05;           // multiplicative noise, |eps| <= 3 cv
};

DeviceProfile agx_like_profile();
DeviceProfile tx2_like_profile();

std::string device_profiles_to_json(const std::vector<DeviceProfile>& profiles);
std::vector<DeviceProfile> device_profiles_from_json(const std::string& text);

// ---- stylized architecture builders (the corpus families) ----
// Shapes and conv FLOPs follow the published architectures closely enough
// to reproduce the reference FLOP figures.
ModelGraph make_resnet(int depth);            // 18, 26, 34, 50, 101, 152
ModelGraph make_densenet(int depth);          // 121, 169, 201, 264
ModelGraph make_mobilenet_v1(double width);   // 0.25, 0.5, 0.75, 1.0
ModelGraph make_mobilenet_v2(double width);   // 0.35 .. 1.4
ModelGraph make_plain_cnn(int depth);         // 11, 13, 16, 19 (VGG-style)

// Randomly generated but always shape-valid CNN; deterministic per
// (cfg.seed, index). Validated with infer_shapes at every configured input
// size; GenerationRetryExceeded after 100 attempts (unreachable with the
// constructive generator).
ModelGraph generate_cnn(const SynthConfig& cfg, int index);

// base = c1*flops + c2*acts + c3*wneurons + c4*(conv+fc params) + c5*layers
//      + c6*sqrt(flops*acts); returned value = base * (1 + eps), eps drawn
// from the seeded generator with |eps| <= 3*noise_cv, clamped to 1e-6 ms.
double synth_latency(const FeatureVector& fv, const DeviceProfile& dp, std::uint64_t noise_seed);

struct CorpusEntry {
  ModelGraph graph;
  std::vector<int> input_sizes;
};

// The full corpus recipe: stylized families x variants plus cfg.n_models
// random graphs, each paired with its input-size list.
std::vector<CorpusEntry> corpus_entries(const SynthConfig& cfg);

// One Dataset per profile over the same graphs: identical feature columns,
// per-profile latency columns. Roughly 2000 records per profile with the
// default config.
std::vector<Dataset> build_synth_corpus(const SynthConfig& cfg,
                                        const std::vector<DeviceProfile>& profiles);

}  // namespace latproph
