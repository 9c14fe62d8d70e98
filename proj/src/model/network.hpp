#pragma once

#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "core/config.hpp"

namespace totnet {

/// Per-frame 2D convolution as a (1, k, k) 3D convolution, then normalization and rectifier.
class SpatialConvImpl : public torch::nn::Module {
 public:
  SpatialConvImpl(int in, int out, int kernel);
  torch::Tensor forward(const torch::Tensor& x);
  torch::nn::Conv3d conv{nullptr};
  torch::nn::BatchNorm3d norm{nullptr};
};
TORCH_MODULE(SpatialConv);

/// Temporal (k, 1, 1) convolution, then normalization and rectifier.
class TemporalConvImpl : public torch::nn::Module {
 public:
  TemporalConvImpl(int in, int out, int kernel);
  torch::Tensor forward(const torch::Tensor& x);
  torch::nn::Conv3d conv{nullptr};
  torch::nn::BatchNorm3d norm{nullptr};
};
TORCH_MODULE(TemporalConv);

struct EncoderOutput {
  torch::Tensor pooled;
  torch::Tensor spatial;   // skip for the decoder's spatial convolution
  torch::Tensor temporal;  // skip for the decoder's temporal convolution (residual sum, pre-pool)
};

class EncoderBlockImpl : public torch::nn::Module {
 public:
  EncoderBlockImpl(int in, int out, int spatial_kernel, int temporal_kernel, int temporal_pool, int spatial_pool);
  EncoderOutput forward(const torch::Tensor& x);

  SpatialConv spatial{nullptr};
  TemporalConv temporal{nullptr};
  std::vector<int64_t> pool;
};
TORCH_MODULE(EncoderBlock);

class BottleneckImpl : public torch::nn::Module {
 public:
  BottleneckImpl(int in, int out, int layers, int kernel);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Sequential spatial{nullptr};
  torch::nn::Conv3d pointwise{nullptr};
  torch::nn::BatchNorm3d norm{nullptr};
};
TORCH_MODULE(Bottleneck);

class DecoderBlockImpl : public torch::nn::Module {
 public:
  /// `in`: channels arriving from below; `skip`: channels of the matching encoder stage (also the output width).
  DecoderBlockImpl(int in, int skip, int spatial_kernel, int temporal_kernel);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& skip_spatial, const torch::Tensor& skip_temporal);

  SpatialConv spatial{nullptr};
  TemporalConv temporal{nullptr};
};
TORCH_MODULE(DecoderBlock);

/// Trilinear resize of a B x C x T x H x W tensor to the given (T, H, W).
torch::Tensor upsample_to(const torch::Tensor& x, const std::vector<int64_t>& size);

/// Axial score vectors from a B x T x H x W score map: max over rows gives x scores, max over columns gives y scores.
struct AxialScores {
  torch::Tensor x;  // B x T x W
  torch::Tensor y;  // B x T x H
};
AxialScores max_project(const torch::Tensor& score_map);

class TotNetImpl : public torch::nn::Module {
 public:
  TotNetImpl(const StagePlan& plan, int window_length, bool use_flow, double flow_scale = 0.1);

  /// frames: B x T x 3 x H x W in [0, 1]; flow: B x (T-1) x 2 x H x W, required iff built with flow.
  AxialScores forward(const torch::Tensor& frames, const std::optional<torch::Tensor>& flow = std::nullopt);
  /// Pre-projection score map, B x T x H x W.
  torch::Tensor score_map(const torch::Tensor& frames, const std::optional<torch::Tensor>& flow = std::nullopt);

  int window_length() const noexcept { return window_length_; }
  bool uses_flow() const noexcept { return use_flow_; }
  int input_channels() const noexcept { return use_flow_ ? 5 : 3; }

  std::vector<EncoderBlock> encoders;
  Bottleneck bottleneck{nullptr};
  std::vector<DecoderBlock> decoders;  // decoders[i] mirrors encoders[i]
  torch::nn::Conv3d head{nullptr};

 private:
  int window_length_;
  bool use_flow_;
  double flow_scale_;
};
TORCH_MODULE(TotNet);

TotNet build_model(const PipelineConfig& config);

/// Trainable scalar count.
std::int64_t count_parameters(const torch::nn::Module& module);
/// Millions with two decimals, e.g. "1.23".
std::string format_millions(std::int64_t count);

}  // namespace totnet
