#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/types.hpp"
#include "ingest/manifest.hpp"

namespace totnet {

/// A clip resized to the working resolution. Immutable once loaded; shared by its windows.
struct LoadedClip {
  std::string clip_id;
  Split split = Split::Train;
  Resolution original_resolution;
  std::vector<ByteImage> frames;
  std::vector<BallAnnotation> annotations;  // sorted by frame_index, working-resolution coordinates
  nlohmann::json scene;
};

using ClipPtr = std::shared_ptr<const LoadedClip>;

LoadedClip load_clip(const ClipManifest& manifest, const PipelineConfig& config);
/// Loads clips in manifest order.
std::vector<ClipPtr> load_clips(const std::vector<ClipManifest>& manifests, const PipelineConfig& config);

/// A window described by its clip and start offset; pixels are copied only on materialize().
struct WindowRef {
  ClipPtr clip;
  int start = 0;
  int length = 0;
  int target_index = 0;

  const BallAnnotation& annotation(int i) const { return clip->annotations.at(static_cast<std::size_t>(start + i)); }
  const BallAnnotation& target() const { return annotation(target_index); }
  /// Stable identifier, used to derive per-window random streams.
  std::uint64_t id() const;
  FrameWindow materialize() const;
};

struct WindowList {
  std::vector<WindowRef> windows;
  std::vector<std::string> warnings;
};

/// Length-T windows at `stride`; windows never span a gap in frame indices or a clip boundary.
WindowList build_windows(const ClipPtr& clip, int window_length, int target_index, int stride);
WindowList build_windows(const std::vector<ClipPtr>& clips, const PipelineConfig& config, int stride);

/// Every frame of a media source: the images of a directory in file-name order, or all frames of a video.
std::vector<ByteImage> read_all_frames(const std::filesystem::path& media);

/// Maps a binary (0 = not visible, 1 = visible) label onto the four-level scheme.
Visibility map_binary_visibility(int code, bool has_coords);

/// Drops windows whose target frame is OutOfFrame when config.exclude_out_of_frame is set.
WindowList filter_training_samples(const std::vector<WindowRef>& windows, const PipelineConfig& config);

}  // namespace totnet
