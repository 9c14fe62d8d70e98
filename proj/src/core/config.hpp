#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace totnet {

enum class ActivationMode { SoftmaxAxial, SigmoidAxial };
enum class Supervision { TargetFrame, AllFrames };
enum class FlowSource { BlockMatching, Oracle };
enum class Interpolation { Nearest, Bilinear };

/// Per-visibility loss weight, indexed by Visibility code.
struct LossWeights {
  std::array<double, 4> w = {0.0, 1.0, 2.0, 4.0};

  double operator[](Visibility v) const { return w[static_cast<std::size_t>(to_code(v))]; }
  static LossWeights uniform() { return {{0.0, 1.0, 1.0, 1.0}}; }
  void validate() const;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

/// Layer plan of the encoder; decoder stages mirror it in reverse.
struct StagePlan {
  std::vector<int> channels = {32, 64, 128};
  std::vector<int> spatial_kernels = {5, 3, 3};
  std::vector<int> temporal_kernels = {3, 3, 1};
  std::vector<int> temporal_pool = {2, 2, 1};
  std::vector<int> spatial_pool = {2, 2, 2};
  int bottleneck_channels = 256;
  int bottleneck_layers = 2;
  int bottleneck_kernel = 3;
  int head_temporal_kernel = 3;

  int stages() const noexcept { return static_cast<int>(channels.size()); }
  /// Temporal extent after every encoder stage, starting from `window_length`.
  std::vector<int> temporal_extents(int window_length) const;
  void validate(int window_length) const;
  friend bool operator==(const StagePlan&, const StagePlan&) = default;
};

struct OptimizerConfig {
  double lr = 1e-3;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 8;
  int epochs = 30;
  double grad_clip = 1.0;  // global L2 norm; <= 0 disables
  std::string schedule = "cosine";  // cosine | constant
  int patience = 5;  // epochs without val improvement; <= 0 disables
  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct AugmentConfig {
  double ball_radius = 3.0;  // working-resolution pixels
  double occlusion_prob = 0.5;
  double mask_scale_min = 1.0;  // multiples of the ball diameter
  double mask_scale_max = 3.0;
  int ring_margin = 4;
  double decoy_prob = 0.5;
  int decoy_count_min = 0;
  int decoy_count_max = 3;
  double hflip_prob = 0.5;
  double vflip_prob = 0.5;
  double crop_prob = 0.5;
  double crop_min_scale = 0.8;
  double jitter_prob = 0.5;
  double brightness = 0.2;
  double contrast = 0.2;
  double saturation = 0.2;
  Interpolation interpolation = Interpolation::Bilinear;
  friend bool operator==(const AugmentConfig&, const AugmentConfig&) = default;
};

struct PipelineConfig {
  int window_length = 5;
  int height = 288;
  int width = 512;
  int target_index = 2;
  double sigma = 3.0;
  LossWeights loss_weights;
  ActivationMode activation_mode = ActivationMode::SoftmaxAxial;
  double confidence_threshold = 0.05;
  double bce_epsilon = 1e-6;
  bool use_weighted_bce = true;
  bool use_occlusion_aug = true;
  bool use_flow = false;
  FlowSource flow_source = FlowSource::BlockMatching;
  double flow_scale = 0.1;
  bool exclude_out_of_frame = true;
  Supervision supervision = Supervision::TargetFrame;
  int train_stride = 1;
  int eval_stride = 5;
  OptimizerConfig optimizer;
  AugmentConfig augment;
  StagePlan model;
  std::uint64_t seed = 42;
  int num_threads = 0;  // 0 keeps the tensor library default

  Resolution resolution() const noexcept { return {height, width}; }
  /// Loss weights in effect: the configured vector, or uniform when weighting is off.
  LossWeights effective_weights() const { return use_weighted_bce ? loss_weights : LossWeights::uniform(); }
  void validate() const;
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Parses a JSON document; absent keys keep their defaults, an empty document is all-defaults.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string dump_config(const PipelineConfig& config);
void save_config(const PipelineConfig& config, const std::filesystem::path& path);

/// Applies one key (dotted path allowed, e.g. "optimizer.lr") given as JSON text.
void set_config_value(PipelineConfig& config, const std::string& key, const std::string& json_value);

/// Parses "wbce,aug,of" (any subset, "" for none) into the three toggles.
void apply_ablation(PipelineConfig& config, const std::string& spec);

std::string_view to_string(ActivationMode m) noexcept;

}  // namespace totnet
