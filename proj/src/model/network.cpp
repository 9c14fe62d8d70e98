#include "model/network.hpp"

#include <cstdio>

#include "core/errors.hpp"

namespace totnet {

namespace F = torch::nn::functional;

namespace {

std::string shape_str(const torch::Tensor& t) {
  std::string s = "(";
  for (int64_t i = 0; i < t.dim(); ++i) s += (i ? ", " : "") + std::to_string(t.size(i));
  return s + ")";
}

void expect_rank5(const torch::Tensor& x, const char* where) {
  if (x.dim() != 5) throw ContractViolation(std::string(where) + " expects B x C x T x H x W, got " + shape_str(x));
}

}  // namespace

SpatialConvImpl::SpatialConvImpl(int in, int out, int kernel) {
  conv = register_module("conv", torch::nn::Conv3d(torch::nn::Conv3dOptions(in, out, {1, kernel, kernel})
                                                       .padding({0, kernel / 2, kernel / 2})
                                                       .bias(false)));
  norm = register_module("norm", torch::nn::BatchNorm3d(out));
}

torch::Tensor SpatialConvImpl::forward(const torch::Tensor& x) { return torch::relu(norm(conv(x))); }

TemporalConvImpl::TemporalConvImpl(int in, int out, int kernel) {
  conv = register_module("conv", torch::nn::Conv3d(torch::nn::Conv3dOptions(in, out, {kernel, 1, 1})
                                                       .padding({kernel / 2, 0, 0})
                                                       .bias(false)));
  norm = register_module("norm", torch::nn::BatchNorm3d(out));
}

torch::Tensor TemporalConvImpl::forward(const torch::Tensor& x) { return torch::relu(norm(conv(x))); }

EncoderBlockImpl::EncoderBlockImpl(int in, int out, int spatial_kernel, int temporal_kernel, int temporal_pool,
                                   int spatial_pool)
    : pool{temporal_pool, spatial_pool, spatial_pool} {
  spatial = register_module("spatial", SpatialConv(in, out, spatial_kernel));
  temporal = register_module("temporal", TemporalConv(out, out, temporal_kernel));
}

EncoderOutput EncoderBlockImpl::forward(const torch::Tensor& x) {
  expect_rank5(x, "encoder block");
  const int64_t expected = spatial->conv->options.in_channels();
  if (x.size(1) != expected)
    throw ContractViolation("encoder block expects " + std::to_string(expected) + " channels, got " + shape_str(x));
  EncoderOutput o;
  o.spatial = spatial(x);
  o.temporal = temporal(o.spatial) + o.spatial;
  o.pooled = F::max_pool3d(o.temporal, F::MaxPool3dFuncOptions(pool));
  return o;
}

BottleneckImpl::BottleneckImpl(int in, int out, int layers, int kernel) {
  spatial = register_module("spatial", torch::nn::Sequential());
  for (int i = 0; i < layers; ++i) spatial->push_back(SpatialConv(i == 0 ? in : out, out, kernel));
  pointwise = register_module("pointwise", torch::nn::Conv3d(torch::nn::Conv3dOptions(out, out, 1).bias(false)));
  norm = register_module("norm", torch::nn::BatchNorm3d(out));
}

torch::Tensor BottleneckImpl::forward(const torch::Tensor& x) {
  expect_rank5(x, "bottleneck");
  if (x.size(2) != 1) throw ContractViolation("bottleneck expects temporal extent 1, got " + shape_str(x));
  return torch::relu(norm(pointwise(spatial->forward(x))));
}

DecoderBlockImpl::DecoderBlockImpl(int in, int skip, int spatial_kernel, int temporal_kernel) {
  spatial = register_module("spatial", SpatialConv(in + skip, skip, spatial_kernel));
  temporal = register_module("temporal", TemporalConv(skip + skip, skip, temporal_kernel));
}

torch::Tensor upsample_to(const torch::Tensor& x, const std::vector<int64_t>& size) {
  if (x.size(2) == size[0] && x.size(3) == size[1] && x.size(4) == size[2]) return x;
  return F::interpolate(x, F::InterpolateFuncOptions().size(size).mode(torch::kTrilinear).align_corners(false));
}

torch::Tensor DecoderBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& skip_spatial,
                                        const torch::Tensor& skip_temporal) {
  expect_rank5(x, "decoder block");
  if (skip_spatial.sizes() != skip_temporal.sizes())
    throw ContractViolation("decoder skips differ: " + shape_str(skip_spatial) + " vs " + shape_str(skip_temporal));
  if (skip_spatial.size(0) != x.size(0))
    throw ContractViolation("decoder skip batch " + shape_str(skip_spatial) + " vs input " + shape_str(x));
  const torch::Tensor up = upsample_to(x, {skip_spatial.size(2), skip_spatial.size(3), skip_spatial.size(4)});
  const torch::Tensor s = spatial(torch::cat({up, skip_spatial}, 1));
  return temporal(torch::cat({s, skip_temporal}, 1)) + s;
}

AxialScores max_project(const torch::Tensor& score_map) {
  return {std::get<0>(score_map.max(2)), std::get<0>(score_map.max(3))};
}

TotNetImpl::TotNetImpl(const StagePlan& plan, int window_length, bool use_flow, double flow_scale)
    : window_length_(window_length), use_flow_(use_flow), flow_scale_(flow_scale) {
  plan.validate(window_length);
  int in = input_channels();
  for (int i = 0; i < plan.stages(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    encoders.push_back(register_module("encoder" + std::to_string(i),
                                       EncoderBlock(in, plan.channels[u], plan.spatial_kernels[u],
                                                    plan.temporal_kernels[u], plan.temporal_pool[u],
                                                    plan.spatial_pool[u])));
    in = plan.channels[u];
  }
  bottleneck = register_module("bottleneck", Bottleneck(in, plan.bottleneck_channels, plan.bottleneck_layers,
                                                        plan.bottleneck_kernel));
  decoders.resize(static_cast<std::size_t>(plan.stages()), nullptr);
  int below = plan.bottleneck_channels;
  for (int i = plan.stages() - 1; i >= 0; --i) {
    const auto u = static_cast<std::size_t>(i);
    decoders[u] = register_module("decoder" + std::to_string(i),
                                  DecoderBlock(below, plan.channels[u], plan.spatial_kernels[u],
                                               plan.temporal_kernels[u]));
    below = plan.channels[u];
  }
  const int k = plan.head_temporal_kernel;
  head = register_module("head", torch::nn::Conv3d(torch::nn::Conv3dOptions(below, 1, {k, 1, 1}).padding({k / 2, 0, 0})));
}

torch::Tensor TotNetImpl::score_map(const torch::Tensor& frames, const std::optional<torch::Tensor>& flow) {
  if (frames.dim() != 5 || frames.size(2) != 3)
    throw ContractViolation("frames must be B x T x 3 x H x W, got " + shape_str(frames));
  if (frames.size(1) != window_length_)
    throw ContractViolation("model built for T=" + std::to_string(window_length_) + ", got " + shape_str(frames));
  if (flow.has_value() != use_flow_)
    throw ContractViolation(use_flow_ ? "model expects flow input" : "model built without flow was given flow");
  torch::Tensor x = frames.permute({0, 2, 1, 3, 4});  // B x 3 x T x H x W
  if (use_flow_) {
    const torch::Tensor& f = *flow;
    const int64_t b = frames.size(0), t = frames.size(1), h = frames.size(3), w = frames.size(4);
    if (f.dim() != 5 || f.size(0) != b || f.size(1) != t - 1 || f.size(2) != 2 || f.size(3) != h || f.size(4) != w)
      throw ContractViolation("flow must be B x (T-1) x 2 x H x W, got " + shape_str(f));
    // Repeat the last field so every frame has one.
    torch::Tensor padded = torch::cat({f, f.narrow(1, t - 2, 1)}, 1).permute({0, 2, 1, 3, 4});
    x = torch::cat({x, padded * flow_scale_}, 1);
  }
  std::vector<EncoderOutput> skips;
  skips.reserve(encoders.size());
  for (auto& enc : encoders) {
    skips.push_back(enc(x));
    x = skips.back().pooled;
  }
  x = bottleneck(x);
  for (int i = static_cast<int>(decoders.size()) - 1; i >= 0; --i) {
    const auto u = static_cast<std::size_t>(i);
    x = decoders[u](x, skips[u].spatial, skips[u].temporal);
  }
  return head(x).squeeze(1);
}

AxialScores TotNetImpl::forward(const torch::Tensor& frames, const std::optional<torch::Tensor>& flow) {
  return max_project(score_map(frames, flow));
}

TotNet build_model(const PipelineConfig& config) {
  return TotNet(config.model, config.window_length, config.use_flow, config.flow_scale);
}

std::int64_t count_parameters(const torch::nn::Module& module) {
  std::int64_t n = 0;
  for (const auto& p : module.parameters())
    if (p.requires_grad()) n += p.numel();
  return n;
}

std::string format_millions(std::int64_t count) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", static_cast<double>(count) / 1e6);
  return buf;
}

}  // namespace totnet
