#include "model/inference.hpp"

#include <algorithm>
#include <map>

#include "core/errors.hpp"

namespace totnet {

namespace {

std::vector<double> row(const torch::Tensor& t, int64_t b, int64_t f) {
  const torch::Tensor r = t.select(0, b).select(0, f).to(torch::kDouble).contiguous();
  return {r.data_ptr<double>(), r.data_ptr<double>() + r.numel()};
}

}  // namespace

torch::Tensor frames_tensor(const std::vector<FrameWindow>& windows) {
  TOTNET_EXPECT(!windows.empty(), "no windows to convert");
  const int64_t b = static_cast<int64_t>(windows.size()), t = windows.front().length();
  const Resolution r = windows.front().resolution();
  torch::Tensor bytes = torch::empty({b, t, r.height, r.width, 3}, torch::kUInt8);
  std::uint8_t* dst = bytes.data_ptr<std::uint8_t>();
  const std::size_t frame_bytes = static_cast<std::size_t>(r.height) * r.width * 3;
  for (const auto& w : windows) {
    TOTNET_EXPECT(w.length() == t && w.resolution() == r, "windows in a batch differ in shape");
    for (const auto& f : w.frames) {
      std::copy(f.data.begin(), f.data.end(), dst);
      dst += frame_bytes;
    }
  }
  return bytes.permute({0, 1, 4, 2, 3}).to(torch::kFloat).div_(255.0f).contiguous();
}

torch::Tensor flow_tensor(const std::vector<FlowField>& fields) {
  TOTNET_EXPECT(!fields.empty(), "no flow fields to convert");
  const auto& f0 = fields.front();
  torch::Tensor out = torch::empty({static_cast<int64_t>(fields.size()), f0.pairs, f0.height, f0.width, 2}, torch::kFloat);
  float* dst = out.data_ptr<float>();
  for (const auto& f : fields) {
    TOTNET_EXPECT(f.pairs == f0.pairs && f.height == f0.height && f.width == f0.width, "flow fields differ in shape");
    dst = std::copy(f.data.begin(), f.data.end(), dst);
  }
  return out.permute({0, 1, 4, 2, 3}).contiguous();
}

std::unique_ptr<FlowProvider> make_flow_provider(const PipelineConfig& config, const std::vector<ClipPtr>& clips) {
  if (!config.use_flow) return nullptr;
  if (config.flow_source == FlowSource::BlockMatching) return std::make_unique<BlockMatchingFlow>();
  auto oracle = std::make_unique<OracleFlow>();
  for (const auto& c : clips) {
    if (c->scene.is_null())
      throw ValidationError("oracle flow needs synthetic scene data; clip '" + c->clip_id + "' has none");
    oracle->add_scene(synth::scene_from_json(c->scene));
  }
  return oracle;
}

heatmap::AxialPrediction to_prediction(const AxialScores& scores, int64_t batch, int64_t frame, ActivationMode mode) {
  return heatmap::activate(row(scores.x, batch, frame), row(scores.y, batch, frame), mode);
}

std::vector<std::vector<heatmap::AxialPrediction>> predict(TotNet& model, const PipelineConfig& config,
                                                           const std::vector<FrameWindow>& windows,
                                                           const FlowProvider* flow) {
  torch::NoGradGuard no_grad;
  model->eval();
  std::optional<torch::Tensor> flow_in;
  if (model->uses_flow()) {
    TOTNET_EXPECT(flow != nullptr, "model uses flow but no provider was given");
    std::vector<FlowField> fields;
    fields.reserve(windows.size());
    for (const auto& w : windows) fields.push_back(compute_flow(w, *flow));
    flow_in = flow_tensor(fields);
  }
  const AxialScores s = model->forward(frames_tensor(windows), flow_in);
  std::vector<std::vector<heatmap::AxialPrediction>> out(windows.size());
  for (std::size_t b = 0; b < windows.size(); ++b)
    for (int f = 0; f < windows[b].length(); ++f)
      out[b].push_back(to_prediction(s, static_cast<int64_t>(b), f, config.activation_mode));
  return out;
}

std::vector<std::optional<heatmap::Detection>> track_frames(TotNet& model, const PipelineConfig& config,
                                                            const std::vector<ByteImage>& frames,
                                                            const FlowProvider* flow, double tau) {
  const int n = static_cast<int>(frames.size()), t = config.window_length;
  if (n < t)
    throw ValidationError("clip has " + std::to_string(n) + " frames, fewer than the window length " + std::to_string(t));
  auto start_of = [&](int i) { return std::clamp(i - config.target_index, 0, n - t); };
  std::vector<int> starts;
  for (int i = 0; i < n; ++i)
    if (starts.empty() || starts.back() != start_of(i)) starts.push_back(start_of(i));

  std::map<int, std::vector<heatmap::AxialPrediction>> by_start;
  const std::size_t step = static_cast<std::size_t>(std::max(1, config.optimizer.batch_size));
  for (std::size_t k = 0; k < starts.size(); k += step) {
    std::vector<FrameWindow> batch;
    for (std::size_t j = k; j < std::min(starts.size(), k + step); ++j) {
      FrameWindow w;
      w.source_id = "clip";
      w.target_index = config.target_index;
      for (int f = starts[j]; f < starts[j] + t; ++f) {
        w.frames.push_back(frames[static_cast<std::size_t>(f)]);
        w.annotations.push_back(BallAnnotation::out_of_frame(f));
      }
      batch.push_back(std::move(w));
    }
    auto preds = predict(model, config, batch, flow);
    for (std::size_t j = 0; j < batch.size(); ++j) by_start[starts[k + j]] = std::move(preds[j]);
  }
  std::vector<std::optional<heatmap::Detection>> out;
  out.reserve(frames.size());
  for (int i = 0; i < n; ++i) {
    const int s0 = start_of(i);
    out.push_back(heatmap::decode(by_start.at(s0)[static_cast<std::size_t>(i - s0)], tau));
  }
  return out;
}

}  // namespace totnet
