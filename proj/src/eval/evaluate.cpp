#include "eval/evaluate.hpp"

#include <algorithm>

namespace totnet::eval {

std::vector<EvalRecord> evaluate_windows(TotNet& model, const PipelineConfig& config,
                                         const std::vector<WindowRef>& windows, const FlowProvider* flow,
                                         int batch_size) {
  std::vector<EvalRecord> records;
  records.reserve(windows.size());
  const std::size_t step = static_cast<std::size_t>(std::max(1, batch_size));
  for (std::size_t i = 0; i < windows.size(); i += step) {
    std::vector<FrameWindow> batch;
    for (std::size_t j = i; j < std::min(windows.size(), i + step); ++j) batch.push_back(windows[j].materialize());
    const auto preds = predict(model, config, batch, flow);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const BallAnnotation& label = batch[b].target();
      const auto det = heatmap::decode(preds[b][static_cast<std::size_t>(batch[b].target_index)],
                                       config.confidence_threshold);
      records.push_back(judge(batch[b].source_id + ":" + std::to_string(label.frame_index), det, label));
    }
  }
  return records;
}

std::vector<EvalRecord> evaluate_clips(TotNet& model, const PipelineConfig& config, const std::vector<ClipPtr>& clips,
                                       const FlowProvider* flow, int stride) {
  const WindowList windows = build_windows(clips, config, stride);
  return evaluate_windows(model, config, windows.windows, flow, config.optimizer.batch_size);
}

}  // namespace totnet::eval
