#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/types.hpp"

namespace totnet {

enum class Split { Train, Val, Test };

std::string_view to_string(Split s) noexcept;
Split split_from_string(const std::string& s);

/// One annotated clip on disk. Paths are absolute once loaded from an index.
struct ClipManifest {
  std::string clip_id;
  /// Directory of numbered frames (%06d.png / %06d.jpg) or a video file.
  std::filesystem::path media;
  std::filesystem::path annotations;
  double fps = 30.0;
  Resolution original_resolution;
  Split split = Split::Train;
  /// Source labels use 0 = not visible / 1 = visible instead of the four-level scheme.
  bool binary_visibility = false;
  /// Generator parameters for synthetic clips; null for external data.
  nlohmann::json scene;
};

inline constexpr int kManifestFormatVersion = 1;
inline constexpr const char* kManifestFileName = "manifest.json";

/// Writes `<dir>/manifest.json` with paths stored relative to `dir`.
void write_manifest_index(const std::filesystem::path& dir, const std::vector<ClipManifest>& clips);
/// Accepts a dataset directory or the index file itself.
std::vector<ClipManifest> read_manifest_index(const std::filesystem::path& dir_or_file);
std::vector<ClipManifest> select_split(const std::vector<ClipManifest>& clips, Split split);

}  // namespace totnet
