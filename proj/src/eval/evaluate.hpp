#pragma once

#include <vector>

#include "core/config.hpp"
#include "eval/metrics.hpp"
#include "ingest/ingest.hpp"
#include "model/inference.hpp"

namespace totnet::eval {

/// Judges the target frame of every window built from `clips` with `stride`.
/// Sample ids are "<clip>:<frame>".
std::vector<EvalRecord> evaluate_windows(TotNet& model, const PipelineConfig& config,
                                         const std::vector<WindowRef>& windows, const FlowProvider* flow,
                                         int batch_size = 8);

std::vector<EvalRecord> evaluate_clips(TotNet& model, const PipelineConfig& config, const std::vector<ClipPtr>& clips,
                                       const FlowProvider* flow, int stride);

}  // namespace totnet::eval
