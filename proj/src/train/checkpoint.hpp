#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "core/config.hpp"
#include "model/network.hpp"
#include "train/adamw.hpp"

namespace totnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'T', 'O', 'T', 'N', 'E', 'T', 'C', 'K'};

struct TrainingState {
  int epoch = 0;  // completed epochs
  std::int64_t global_step = 0;
  double best_metric = -1e300;
  double best_loss = 1e300;  // validation loss at best_epoch; breaks ties in best_metric
  int best_epoch = -1;
  int epochs_without_improvement = 0;
  bool stopped_early = false;
  friend bool operator==(const TrainingState&, const TrainingState&) = default;
};

nlohmann::json to_json(const TrainingState& s);
TrainingState training_state_from_json(const nlohmann::json& j);

struct CheckpointData {
  PipelineConfig config;
  NamedTensors weights;
  NamedTensors buffers;
  NamedTensors optimizer_moments;
  std::int64_t optimizer_steps = 0;
  TrainingState state;
};

/// Snapshot of a model (and optionally its optimizer); tensors are cloned.
CheckpointData capture(const TotNet& model, const PipelineConfig& config, const AdamW* optimizer,
                       const TrainingState& state);

/// Sectioned binary archive: magic, format version, then named sections with CRC-32 each
/// (config, weights, buffers, optimizer, state). Written to a temporary file and renamed into place.
void save_checkpoint(const CheckpointData& data, const std::filesystem::path& path);
/// Throws CheckpointError naming the failing section.
CheckpointData load_checkpoint(const std::filesystem::path& path);

/// Copies weights and buffers into `model`; names and shapes must match exactly.
void restore_model(TotNet& model, const CheckpointData& data);
TotNet model_from_checkpoint(const CheckpointData& data);

}  // namespace totnet
