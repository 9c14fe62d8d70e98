#include "ingest/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>

#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include "core/annotation_io.hpp"
#include "core/errors.hpp"
#include "core/random.hpp"

namespace totnet {

namespace fs = std::filesystem;

namespace {

fs::path numbered_frame(const fs::path& dir, int index) {
  char name[32];
  for (const char* ext : {"png", "jpg", "jpeg"}) {
    std::snprintf(name, sizeof name, "%06d.%s", index, ext);
    fs::path p = dir / name;
    if (fs::exists(p)) return p;
  }
  return {};
}

std::string join_indices(const std::vector<int>& idx) {
  std::string s;
  const std::size_t shown = std::min<std::size_t>(idx.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) s += (i ? "," : "") + std::to_string(idx[i]);
  if (idx.size() > shown) s += ",... (" + std::to_string(idx.size()) + " total)";
  return s;
}

std::vector<ByteImage> read_video_frames(const fs::path& path, const std::vector<int>& wanted) {
  cv::VideoCapture cap(path.string());
  if (!cap.isOpened()) throw IngestError("cannot open video " + path.string());
  std::map<int, ByteImage> found;
  const int last = wanted.empty() ? -1 : *std::max_element(wanted.begin(), wanted.end());
  cv::Mat bgr;
  for (int i = 0; i <= last && cap.read(bgr); ++i) {
    if (!std::binary_search(wanted.begin(), wanted.end(), i)) continue;
    ByteImage img(bgr.rows, bgr.cols);
    cv::Mat rgb(bgr.rows, bgr.cols, CV_8UC3, img.data.data());
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    found.emplace(i, std::move(img));
  }
  std::vector<int> missing;
  std::vector<ByteImage> out;
  for (int i : wanted) {
    auto it = found.find(i);
    if (it == found.end()) {
      missing.push_back(i);
    } else {
      out.push_back(std::move(it->second));
    }
  }
  if (!missing.empty()) throw IngestError(path.string() + ": missing frames " + join_indices(missing));
  return out;
}

}  // namespace

std::vector<ByteImage> read_all_frames(const fs::path& media) {
  std::vector<ByteImage> out;
  if (fs::is_directory(media)) {
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(media)) {
      std::string ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (e.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) out.push_back(read_image(p));
  } else if (fs::exists(media)) {
    cv::VideoCapture cap(media.string());
    if (!cap.isOpened()) throw IngestError("cannot open video " + media.string());
    for (cv::Mat bgr; cap.read(bgr);) {
      ByteImage img(bgr.rows, bgr.cols);
      cv::Mat rgb(bgr.rows, bgr.cols, CV_8UC3, img.data.data());
      cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
      out.push_back(std::move(img));
    }
  } else {
    throw IngestError("media not found: " + media.string());
  }
  if (out.empty()) throw IngestError("no frames in " + media.string());
  for (const auto& f : out)
    if (f.resolution() != out.front().resolution()) throw IngestError(media.string() + ": frames differ in size");
  return out;
}

Visibility map_binary_visibility(int code, bool has_coords) {
  if (code == 1) return Visibility::Visible;
  return has_coords ? Visibility::FullyOccluded : Visibility::OutOfFrame;
}

LoadedClip load_clip(const ClipManifest& manifest, const PipelineConfig& config) {
  auto rows = read_annotation_rows(manifest.annotations);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });

  std::vector<int> indices;
  indices.reserve(rows.size());
  for (const auto& r : rows) indices.push_back(r.frame_index);
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end())
    throw IngestError(manifest.annotations.string() + ": duplicate frame index");

  LoadedClip clip;
  clip.clip_id = manifest.clip_id;
  clip.split = manifest.split;
  clip.scene = manifest.scene;
  const Resolution working = config.resolution();

  std::vector<ByteImage> raw;
  if (fs::is_directory(manifest.media)) {
    std::vector<fs::path> paths;
    std::vector<int> missing;
    for (int i : indices) {
      fs::path p = numbered_frame(manifest.media, i);
      if (p.empty()) missing.push_back(i);
      paths.push_back(std::move(p));
    }
    if (!missing.empty())
      throw IngestError(manifest.media.string() + ": missing frames " + join_indices(missing));
    raw.reserve(paths.size());
    for (const auto& p : paths) raw.push_back(read_image(p));
  } else if (fs::exists(manifest.media)) {
    raw = read_video_frames(manifest.media, indices);
  } else {
    throw IngestError("media not found: " + manifest.media.string());
  }

  clip.original_resolution = raw.empty() ? manifest.original_resolution : raw.front().resolution();
  const double orig_w = clip.original_resolution.width, orig_h = clip.original_resolution.height;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (raw[i].resolution() != clip.original_resolution)
      throw IngestError(manifest.clip_id + ": frame " + std::to_string(r.frame_index) + " has a different size");
    Visibility v;
    if (manifest.binary_visibility) {
      if (r.code > 1) {
        throw IngestError(manifest.annotations.string() + ": binary label scheme but code " + std::to_string(r.code));
      }
      const bool has_coords = r.x >= 0.0 && r.y >= 0.0 && !(r.x == 0.0 && r.y == 0.0);
      v = map_binary_visibility(r.code, has_coords);
    } else {
      v = static_cast<Visibility>(r.code);
    }
    BallAnnotation a = BallAnnotation::out_of_frame(r.frame_index);
    if (v != Visibility::OutOfFrame) {
      a = {r.frame_index, r.x * working.width / orig_w, r.y * working.height / orig_h, v};
    }
    clip.annotations.push_back(validate_annotation(a, working));
    clip.frames.push_back(resize_image(raw[i], working));
  }
  return clip;
}

std::vector<ClipPtr> load_clips(const std::vector<ClipManifest>& manifests, const PipelineConfig& config) {
  std::vector<ClipPtr> out;
  out.reserve(manifests.size());
  for (const auto& m : manifests) out.push_back(std::make_shared<const LoadedClip>(load_clip(m, config)));
  return out;
}

std::uint64_t WindowRef::id() const {
  return derive_seed(hash_string(clip->clip_id), static_cast<std::uint64_t>(start));
}

FrameWindow WindowRef::materialize() const {
  FrameWindow w;
  w.frames.assign(clip->frames.begin() + start, clip->frames.begin() + start + length);
  w.annotations.assign(clip->annotations.begin() + start, clip->annotations.begin() + start + length);
  w.target_index = target_index;
  w.source_id = clip->clip_id;
  w.original_resolution = clip->original_resolution;
  return w;
}

WindowList build_windows(const ClipPtr& clip, int window_length, int target_index, int stride) {
  TOTNET_EXPECT(window_length >= 1, "window_length must be >= 1");
  TOTNET_EXPECT(stride >= 1, "stride must be >= 1");
  TOTNET_EXPECT(target_index >= 0 && target_index < window_length, "target_index outside the window");
  WindowList out;
  const int n = static_cast<int>(clip->annotations.size());
  if (n < window_length) {
    out.warnings.push_back("clip " + clip->clip_id + " has " + std::to_string(n) + " frames, fewer than window " +
                           std::to_string(window_length));
    return out;
  }
  // Runs of consecutive frame indices; a window must sit inside one run.
  int run_start = 0;
  for (int i = 1; i <= n; ++i) {
    const bool breaks = i == n || clip->annotations[static_cast<std::size_t>(i)].frame_index !=
                                      clip->annotations[static_cast<std::size_t>(i - 1)].frame_index + 1;
    if (!breaks) continue;
    for (int s = run_start; s + window_length <= i; s += stride)
      out.windows.push_back({clip, s, window_length, target_index});
    if (i < n) out.warnings.push_back("clip " + clip->clip_id + " has a gap before frame index " +
                                      std::to_string(clip->annotations[static_cast<std::size_t>(i)].frame_index));
    run_start = i;
  }
  return out;
}

WindowList build_windows(const std::vector<ClipPtr>& clips, const PipelineConfig& config, int stride) {
  WindowList all;
  for (const auto& c : clips) {
    auto part = build_windows(c, config.window_length, config.target_index, stride);
    all.windows.insert(all.windows.end(), part.windows.begin(), part.windows.end());
    all.warnings.insert(all.warnings.end(), part.warnings.begin(), part.warnings.end());
  }
  return all;
}

WindowList filter_training_samples(const std::vector<WindowRef>& windows, const PipelineConfig& config) {
  WindowList out;
  if (!config.exclude_out_of_frame) {
    out.windows = windows;
    return out;
  }
  for (const auto& w : windows)
    if (w.target().in_frame()) out.windows.push_back(w);
  if (out.windows.empty() && !windows.empty())
    out.warnings.push_back("every window has an out-of-frame target; nothing left to train on");
  return out;
}

}  // namespace totnet
