#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "retscreen/common.hpp"
#include "retscreen/image.hpp"

namespace retscreen {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);
  int64_t numel() const { return static_cast<int64_t>(v.size()); }
  bool empty() const { return v.empty(); }
};

enum class HeadMode { t2d_only, biomarkers_only, multi_target };
const char* to_string(HeadMode mode);
HeadMode parse_head_mode(std::string_view s);

struct ConvBlock {
  int out_channels = 8;
  int kernel = 3;
  int stride = 1;
  bool max_pool = true;
  bool operator==(const ConvBlock&) const = default;
};

struct ModelConfig {
  int input_size = 800;
  std::vector<ConvBlock> conv_blocks{{8}, {16}, {32}, {64}};
  int trunk_feature_dim = 64;
  HeadMode head_mode = HeadMode::multi_target;

  void validate() const;
};

// architecture fingerprint, stored in checkpoints and output provenance
uint64_t config_hash(const ModelConfig& config);

// Trunk = conv blocks -> global average pool -> one dense ReLU layer.
// Heads are linear maps from the trunk features; absent heads have empty
// tensors. Canonical order: conv{i}.w/.b, trunk.w/.b, head_t2d.w/.b,
// head_bio.w/.b.
struct ParamSet {
  std::vector<Tensor> conv_w, conv_b;
  Tensor trunk_w, trunk_b;
  Tensor t2d_w, t2d_b;
  Tensor bio_w, bio_b;

  bool has_t2d() const { return !t2d_w.empty(); }
  bool has_bio() const { return !bio_w.empty(); }
  void for_each_param(const std::function<void(const std::string&, Tensor&)>& fn);
  void for_each_param(const std::function<void(const std::string&, const Tensor&)>& fn) const;
};

struct Model {
  ModelConfig config;
  ParamSet params;
};

struct Outputs {
  size_t batch = 0;
  std::vector<double> t2d_logit;   // clamped to [-30, 30]
  std::vector<double> t2d_prob;    // sigmoid of the clamped logit
  std::vector<double> biomarkers;  // batch x 4, row-major
  bool has_t2d() const { return !t2d_prob.empty(); }
  bool has_bio() const { return !biomarkers.empty(); }
};

struct Targets {
  std::vector<int> labels;         // batch, when a t2d head is present
  std::vector<double> biomarkers;  // batch x 4, when a biomarker head is present
};

// mse and l2 are the weighted contributions (lambda_bio * MSE, l2 * |w|^2),
// so total is exactly their sum with bce.
struct LossComponents {
  double total = 0.0;
  double bce = 0.0;
  double mse = 0.0;
  double l2 = 0.0;
};

// Weights ~ U(-a, a) with a = sqrt(6 / fan_in), biases zero. Each tensor has
// its own stream derived from (seed, tensor name), so the trunk draw does not
// depend on which heads exist.
Model init_model(const ModelConfig& config, uint64_t seed);

// Loads the trunk (and any head present in both the file and the config);
// heads absent from the file are drawn randomly from `seed`.
Model init_model_from_checkpoint(const ModelConfig& config, const std::filesystem::path& path,
                                 uint64_t seed);

// Trunk is preserved bitwise; every head required by new_mode is freshly
// initialized from `seed`, other heads are dropped.
Model replace_output_head(const Model& model, HeadMode new_mode, uint64_t seed);

Outputs forward(const Model& model, const std::vector<ImageTensor>& batch, int threads = 1);

LossComponents loss(const Model& model, const Outputs& outputs, const Targets& targets,
                    double lambda_bio, double l2);

// Exact reverse-mode gradients of loss(). Per-sample contributions are
// accumulated in fixed chunk order, so the result is independent of thread
// scheduling.
ParamSet gradients(const Model& model, const std::vector<ImageTensor>& batch,
                   const Targets& targets, double lambda_bio, double l2, int threads = 1,
                   LossComponents* loss_out = nullptr);

ParamSet zeros_like(const ParamSet& params);

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const std::map<std::string, std::string>& extra = {});
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace retscreen
