#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "augment/augment.hpp"
#include "core/config.hpp"
#include "eval/metrics.hpp"
#include "ingest/ingest.hpp"
#include "model/flow.hpp"
#include "model/network.hpp"
#include "train/adamw.hpp"
#include "train/checkpoint.hpp"

namespace totnet {

/// Frames of a window that carry loss under the configured supervision mode.
std::vector<int> supervised_frames(const PipelineConfig& config, int window_length);

struct StepResult {
  double loss = 0.0;       // before the update
  double grad_norm = 0.0;  // before clipping
};

struct ValidationResult {
  double loss = 0.0;
  std::vector<eval::EvalRecord> records;
  eval::Summary summary;
};

/// Model, optimizer and flow provider for one run. `step` consumes already-augmented windows.
class Trainer {
 public:
  /// Seeds the tensor library from config.seed before building the model.
  explicit Trainer(const PipelineConfig& config, std::unique_ptr<FlowProvider> flow = nullptr);

  StepResult step(const std::vector<FrameWindow>& batch, double lr);
  /// Loss of a batch in training mode without touching weights or gradients.
  double loss(const std::vector<FrameWindow>& batch);
  ValidationResult validate(const std::vector<WindowRef>& windows);

  TotNet& model() noexcept { return model_; }
  AdamW& optimizer() noexcept { return *optimizer_; }
  const PipelineConfig& config() const noexcept { return config_; }
  const FlowProvider* flow() const noexcept { return flow_.get(); }

 private:
  std::optional<torch::Tensor> flow_for(const std::vector<FrameWindow>& batch) const;
  /// Mean loss of the batch and, if `with_grad`, gradients on the parameters.
  double forward_loss(const std::vector<FrameWindow>& batch, bool with_grad);

  PipelineConfig config_;
  TotNet model_{nullptr};
  std::unique_ptr<AdamW> optimizer_;
  std::unique_ptr<FlowProvider> flow_;
};

struct TrainOptions {
  std::filesystem::path out_dir;
  /// Continue from out_dir/last.ckpt when it exists.
  bool resume = false;
  /// Called with every metrics record as it is appended to the log.
  std::function<void(const nlohmann::json&)> on_record;
};

struct TrainResult {
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  std::filesystem::path metrics_log;
  TrainingState state;
  std::vector<double> epoch_losses;  // epochs run in this call
  augment::Counters counters;
  std::vector<std::string> warnings;
};

/// Full run: seeded shuffling, augmentation per toggles, optional flow, decoupled-decay updates,
/// per-epoch validation, best/last checkpoints and a newline-delimited metrics log in `out_dir`.
TrainResult train(const PipelineConfig& config, const std::vector<ClipPtr>& train_clips,
                  const std::vector<ClipPtr>& val_clips, const TrainOptions& options);

/// Early-stopping score: Visible accuracy when the split has Visible samples, otherwise negative loss.
/// Equal scores count as an improvement when the validation loss is lower.
double selection_metric(const ValidationResult& v);

}  // namespace totnet
