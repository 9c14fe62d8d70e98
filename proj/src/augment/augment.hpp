#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/random.hpp"
#include "core/types.hpp"

namespace totnet::augment {

enum class MaskShape { Rectangle, Ellipse };

/// Axis-aligned rectangle or ellipse; a pixel belongs to it when its center does.
struct Region {
  MaskShape shape = MaskShape::Rectangle;
  double cx = 0.0, cy = 0.0;
  double half_w = 1.0, half_h = 1.0;

  bool contains(double x, double y) const noexcept;
  /// Inside the region grown by `margin` pixels on every side but not inside the region.
  bool in_ring(double x, double y, int margin) const noexcept;
};

/// Mean of the ring around `region`, per channel, in 8-bit units. Falls back to the whole image
/// when the ring lies entirely outside it.
std::array<double, 3> ring_mean(const ByteImage& image, const Region& region, int margin);
void fill_region(ByteImage& image, const Region& region, const std::array<std::uint8_t, 3>& value);

struct Counters {
  long occlusion_noops = 0;
  long decoys_dropped = 0;
  long crops_skipped = 0;
};

struct OcclusionParams {
  double ball_radius = 3.0;
  double scale_min = 1.0;  // side length in ball diameters
  double scale_max = 3.0;
  std::vector<MaskShape> shapes = {MaskShape::Rectangle, MaskShape::Ellipse};
  int ring_margin = 4;
};

struct DecoyParams {
  double ball_radius = 3.0;
  int count_min = 0;
  int count_max = 3;
  double scale_min = 1.0;
  double scale_max = 3.0;
  int ring_margin = 4;
  int max_attempts = 20;
};

struct GeometricParams {
  double hflip_prob = 0.5;
  double vflip_prob = 0.5;
  double crop_prob = 0.5;
  double crop_min_scale = 0.8;
  double jitter_prob = 0.5;
  double brightness = 0.2;
  double contrast = 0.2;
  double saturation = 0.2;
  Interpolation interpolation = Interpolation::Bilinear;
  double ball_radius = 3.0;
  int max_crop_attempts = 10;
};

/// Masks the target-frame ball with a random shape filled by its surrounding ring mean.
/// Labels are left untouched. No-op (counted) unless the target is Visible or PartiallyOccluded.
FrameWindow occlude_target(FrameWindow window, Rng& rng, const OcclusionParams& params, Counters* counters = nullptr,
                           Region* sampled = nullptr);

/// Fills random ring-mean patches in the non-target frames, never touching a ball disc.
FrameWindow add_decoy_patches(FrameWindow window, Rng& rng, const DecoyParams& params, Counters* counters = nullptr);

/// Pixels within `ball_radius + 1` of an in-frame ball center; decoys must not touch these.
bool in_ball_guard(const BallAnnotation& ann, double ball_radius, double x, double y) noexcept;

struct CropBox {
  int top = 0, left = 0, height = 0, width = 0;
};

FrameWindow hflip(FrameWindow window);
FrameWindow vflip(FrameWindow window);
/// Crops every frame to `box` and resizes back to the window resolution.
/// Coordinates map by x' = (x - left) * W / w, y' = (y - top) * H / h; balls leaving the frame become OutOfFrame.
FrameWindow crop_resize(FrameWindow window, const CropBox& box, Interpolation interpolation);
FrameWindow color_jitter(FrameWindow window, double brightness, double contrast, double saturation);

/// Random flips, crop-resize and color jitter shared by every frame of the window.
FrameWindow geometric_augment(FrameWindow window, Rng& rng, const GeometricParams& params,
                              Counters* counters = nullptr);

struct Op {
  std::string name;
  double probability = 1.0;
  std::function<FrameWindow(FrameWindow, Rng&)> apply;
};

/// Applies ops in order, each behind its own Bernoulli draw; fired op names go to window.applied_ops.
FrameWindow compose(const std::vector<Op>& pipeline, FrameWindow window, Rng& rng);

/// Training pipeline: flips, crop, jitter, then (if enabled) target occlusion and decoys.
std::vector<Op> training_pipeline(const PipelineConfig& config, Counters* counters = nullptr);

OcclusionParams occlusion_params(const AugmentConfig& a);
DecoyParams decoy_params(const AugmentConfig& a);

}  // namespace totnet::augment
