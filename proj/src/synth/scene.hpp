#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/types.hpp"
#include "ingest/manifest.hpp"

namespace totnet::synth {

struct Rgb {
  double r = 0.0, g = 0.0, b = 0.0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Point {
  double x = 0.0, y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

enum class OccluderShape { Rectangle, Ellipse };

/// Solid shape moving at constant velocity; (cx, cy) is its center at frame 0.
struct OccluderSpec {
  OccluderShape shape = OccluderShape::Rectangle;
  double cx = 0.0, cy = 0.0;
  double half_w = 10.0, half_h = 10.0;
  double vx = 0.0, vy = 0.0;
  Rgb color;
  friend bool operator==(const OccluderSpec&, const OccluderSpec&) = default;
};

struct OccluderState {
  OccluderShape shape = OccluderShape::Rectangle;
  double cx = 0.0, cy = 0.0;
  double half_w = 0.0, half_h = 0.0;
  Rgb color;

  /// Hard-edged test on a pixel center.
  bool covers(double px, double py) const noexcept;
};

/// Ballistic motion in image coordinates (y grows downward, gravity > 0 pulls down).
struct TrajectorySpec {
  double x0 = 0.0, y0 = 0.0;
  double vx0 = 0.0, vy0 = 0.0;
  double gravity = 0.0;
  double restitution = 0.9;
  /// Row of the table surface; the ball center bounces at table_y - ball_radius. <= 0 disables.
  double table_y = 0.0;
  /// Reflect at the left/right borders, as if returned by a racket.
  bool side_walls = false;
  /// Upward speed given on a side-wall return; 0 keeps the vertical velocity.
  double hit_lift = 0.0;
  friend bool operator==(const TrajectorySpec&, const TrajectorySpec&) = default;
};

struct BackgroundSpec {
  Rgb top{0.15, 0.2, 0.3};
  Rgb bottom{0.25, 0.3, 0.35};
  Rgb table{0.1, 0.25, 0.45};
  double texture_amplitude = 0.04;
  double texture_period = 23.0;
  double texture_phase = 0.0;
  friend bool operator==(const BackgroundSpec&, const BackgroundSpec&) = default;
};

struct SceneSpec {
  std::string clip_id = "clip";
  Resolution resolution{144, 256};
  int clip_length = 100;
  double ball_radius = 3.0;
  Rgb ball_color{1.0, 0.85, 0.3};
  BackgroundSpec background;
  TrajectorySpec physics;
  std::vector<OccluderSpec> occluders;
  double noise_level = 0.01;
  /// Covered-area fraction at or above which the ball counts as fully occluded.
  double full_cover_fraction = 0.9;
  std::uint64_t seed = 0;
  Split split = Split::Train;
  double fps = 120.0;

  void validate(int min_length = 1) const;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

nlohmann::json to_json(const SceneSpec& spec);
SceneSpec scene_from_json(const nlohmann::json& j);

/// Ball center per frame; deterministic.
std::vector<Point> gen_trajectory(const SceneSpec& spec);

std::vector<OccluderState> occluders_at(const SceneSpec& spec, int frame);

/// Fraction of the ball's rendered (anti-aliased, in-frame) footprint under occluder pixels.
double covered_fraction(const SceneSpec& spec, Point ball, const std::vector<OccluderState>& occluders);

Visibility classify_visibility(const SceneSpec& spec, Point ball, const std::vector<OccluderState>& occluders);

struct RenderedFrame {
  ByteImage image;
  Visibility visibility = Visibility::Visible;
};

/// Draws background, ball, then occluders. `frame_index` seeds the sensor noise.
RenderedFrame render_frame(const SceneSpec& spec, Point ball, const std::vector<OccluderState>& occluders,
                           int frame_index, bool draw_ball = true);

/// Per-pixel anti-aliasing weight of the ball disc, row-major H*W.
std::vector<float> ball_coverage(const SceneSpec& spec, Point ball);

struct ClipLabels {
  std::vector<BallAnnotation> annotations;
  std::vector<Point> trajectory;
};

/// Labels without rendering pixels.
ClipLabels label_clip(const SceneSpec& spec);

struct DatasetReport {
  std::vector<ClipManifest> manifests;
  std::array<long, 4> histogram{};  // indexed by visibility code
  long frames = 0;
  double occlusion_fraction() const noexcept {
    return frames ? static_cast<double>(histogram[2] + histogram[3]) / frames : 0.0;
  }
};

/// Writes `<out>/<clip_id>/%06d.png`, `<out>/<clip_id>/labels.csv` and `<out>/manifest.json`.
DatasetReport gen_dataset(const std::vector<SceneSpec>& specs, const std::filesystem::path& out_dir);

/// Parameters of the seeded synthetic benchmark family.
struct BenchmarkSpec {
  Resolution resolution{144, 256};
  int train_clips = 20;
  int val_clips = 5;
  int test_clips = 20;
  int train_clip_length = 104;
  int eval_clip_length = 100;
  double ball_radius = 3.0;
  double occlusion_rate = 0.25;
  double noise_level = 0.01;
  double full_cover_fraction = 0.9;
  std::uint64_t seed = 7;
  friend bool operator==(const BenchmarkSpec&, const BenchmarkSpec&) = default;
};

nlohmann::json to_json(const BenchmarkSpec& spec);
/// Unknown keys are rejected with ConfigError.
BenchmarkSpec benchmark_from_json(const nlohmann::json& j);

/// Random rallies with occluders placed on the ball path until each clip's occluded-frame
/// fraction reaches `occlusion_rate`.
std::vector<SceneSpec> benchmark_family(const BenchmarkSpec& spec);

}  // namespace totnet::synth
