#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "core/types.hpp"
#include "heatmap/loss.hpp"

namespace totnet::eval {

/// Copy of `frame` with the prediction circled, the label crossed and the visibility code printed.
/// A missing prediction prints "no ball" instead of a circle.
ByteImage render_overlay(const ByteImage& frame, const std::optional<heatmap::Detection>& prediction,
                         const std::optional<BallAnnotation>& label);

/// Writes one numbered PNG per frame into `out_dir`; returns the number written.
std::size_t render_overlays(const std::vector<ByteImage>& frames,
                            const std::vector<std::optional<heatmap::Detection>>& predictions,
                            const std::vector<std::optional<BallAnnotation>>& labels,
                            const std::filesystem::path& out_dir);

}  // namespace totnet::eval
