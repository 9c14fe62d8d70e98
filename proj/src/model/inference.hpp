#pragma once

#include <memory>
#include <vector>

#include <torch/torch.h>

#include "core/config.hpp"
#include "heatmap/loss.hpp"
#include "ingest/ingest.hpp"
#include "model/flow.hpp"
#include "model/network.hpp"

namespace totnet {

/// B x T x 3 x H x W float tensor with values k/255.
torch::Tensor frames_tensor(const std::vector<FrameWindow>& windows);
/// B x (T-1) x 2 x H x W.
torch::Tensor flow_tensor(const std::vector<FlowField>& fields);

/// Provider selected by the config; the oracle is primed with the scenes carried by `clips`.
std::unique_ptr<FlowProvider> make_flow_provider(const PipelineConfig& config, const std::vector<ClipPtr>& clips);

/// Runs the model in inference mode and returns activated axial predictions, [window][frame].
std::vector<std::vector<heatmap::AxialPrediction>> predict(TotNet& model, const PipelineConfig& config,
                                                           const std::vector<FrameWindow>& windows,
                                                           const FlowProvider* flow);

/// One decoded detection per frame of a clip (working resolution, at least T frames). Frame i is read
/// from the window starting at clamp(i - target_index, 0, N - T), so every frame gets a prediction.
std::vector<std::optional<heatmap::Detection>> track_frames(TotNet& model, const PipelineConfig& config,
                                                            const std::vector<ByteImage>& frames,
                                                            const FlowProvider* flow, double tau);

/// Activated predictions for one batch element / frame of raw axial scores.
heatmap::AxialPrediction to_prediction(const AxialScores& scores, int64_t batch, int64_t frame, ActivationMode mode);

}  // namespace totnet
