#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace totnet {

enum class Visibility : int {
  OutOfFrame = 0,
  Visible = 1,
  PartiallyOccluded = 2,
  FullyOccluded = 3,
};

inline constexpr std::array<Visibility, 4> kAllVisibilities = {
    Visibility::OutOfFrame, Visibility::Visible, Visibility::PartiallyOccluded,
    Visibility::FullyOccluded};

constexpr int to_code(Visibility v) noexcept { return static_cast<int>(v); }

/// Throws AnnotationError(frame_index) for codes outside 0..3.
Visibility visibility_from_code(int code, int frame_index = -1);

std::string_view to_string(Visibility v) noexcept;

struct Resolution {
  int height = 0;
  int width = 0;
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Coordinates stored for OutOfFrame labels. Loss and metric code never reads them.
inline constexpr double kOutOfFrameCoord = -1.0;

struct BallAnnotation {
  int frame_index = 0;
  double x = kOutOfFrameCoord;
  double y = kOutOfFrameCoord;
  Visibility visibility = Visibility::OutOfFrame;

  bool in_frame() const noexcept { return visibility != Visibility::OutOfFrame; }
  static BallAnnotation out_of_frame(int frame_index) {
    return {frame_index, kOutOfFrameCoord, kOutOfFrameCoord, Visibility::OutOfFrame};
  }
  friend bool operator==(const BallAnnotation&, const BallAnnotation&) = default;
};

/// Returns `ann` unchanged when its coordinates lie inside `res` (or it is OutOfFrame).
BallAnnotation validate_annotation(const BallAnnotation& ann, Resolution res);

/// 8-bit interleaved RGB image; channel value k stands for intensity k/255.
struct ByteImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  ByteImage() = default;
  ByteImage(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w * 3, fill) {}

  Resolution resolution() const noexcept { return {height, width}; }
  std::uint8_t& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  double value(int y, int x, int c) const { return at(y, x, c) / 255.0; }
  friend bool operator==(const ByteImage&, const ByteImage&) = default;
};

inline std::uint8_t to_byte(double v) noexcept {
  const double s = v * 255.0 + 0.5;
  if (s <= 0.0) return 0;
  if (s >= 255.0) return 255;
  return static_cast<std::uint8_t>(s);
}

/// T consecutive frames of one clip plus their labels; coordinates in working resolution.
struct FrameWindow {
  std::vector<ByteImage> frames;
  std::vector<BallAnnotation> annotations;
  int target_index = 0;
  std::string source_id;
  Resolution original_resolution;
  /// Names of augmentation ops that fired, in order.
  std::vector<std::string> applied_ops;

  int length() const noexcept { return static_cast<int>(frames.size()); }
  Resolution resolution() const noexcept {
    return frames.empty() ? Resolution{} : frames.front().resolution();
  }
  const BallAnnotation& target() const { return annotations.at(target_index); }
};

}  // namespace totnet
