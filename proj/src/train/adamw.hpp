#pragma once

#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "core/config.hpp"

namespace totnet {

using NamedTensors = std::vector<std::pair<std::string, torch::Tensor>>;

/// Adam with decoupled weight decay. Decay applies to parameters of rank > 1 (convolution kernels);
/// biases and normalization affine terms are not decayed.
class AdamW {
 public:
  AdamW(NamedTensors params, const OptimizerConfig& config);

  /// One update using the gradients currently stored on the parameters. Missing gradients count as zero.
  void step(double lr);
  void zero_grad();
  /// Global L2 norm of all gradients.
  double grad_norm() const;
  /// Scales gradients so their global norm is at most `max_norm`; returns the norm before clipping.
  double clip_grad_norm(double max_norm);

  std::int64_t steps() const noexcept { return steps_; }
  const NamedTensors& params() const noexcept { return params_; }
  bool decays(std::size_t i) const { return decay_.at(i); }

  /// Moment buffers named "<param>.m" / "<param>.v".
  NamedTensors state() const;
  void load_state(const NamedTensors& moments, std::int64_t steps);

 private:
  NamedTensors params_;
  std::vector<torch::Tensor> m_, v_;
  std::vector<bool> decay_;
  OptimizerConfig config_;
  std::int64_t steps_ = 0;
};

/// Learning rate at `step` of `total_steps` under the configured schedule.
double scheduled_lr(const OptimizerConfig& config, std::int64_t step, std::int64_t total_steps);

}  // namespace totnet
