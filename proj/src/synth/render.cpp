#include <algorithm>
#include <cmath>
#include <numbers>

#include "core/random.hpp"
#include "synth/scene.hpp"

namespace totnet::synth {

namespace {

constexpr int kSubsamples = 4;

struct PixelBox {
  int y0, y1, x0, x1;  // inclusive, clipped to the image
};

PixelBox disc_box(const SceneSpec& spec, Point ball) {
  const double r = spec.ball_radius + 1.0;
  return {std::max(0, static_cast<int>(std::floor(ball.y - r))),
          std::min(spec.resolution.height - 1, static_cast<int>(std::ceil(ball.y + r))),
          std::max(0, static_cast<int>(std::floor(ball.x - r))),
          std::min(spec.resolution.width - 1, static_cast<int>(std::ceil(ball.x + r)))};
}

// Fraction of the pixel square centred on (px, py) inside the disc.
double pixel_coverage(double px, double py, Point ball, double radius) {
  const double r2 = radius * radius;
  int inside = 0;
  for (int sy = 0; sy < kSubsamples; ++sy) {
    const double y = py - 0.5 + (sy + 0.5) / kSubsamples - ball.y;
    for (int sx = 0; sx < kSubsamples; ++sx) {
      const double x = px - 0.5 + (sx + 0.5) / kSubsamples - ball.x;
      inside += (x * x + y * y <= r2);
    }
  }
  return static_cast<double>(inside) / (kSubsamples * kSubsamples);
}

bool in_frame(const SceneSpec& spec, Point p) {
  return p.x >= 0.0 && p.x < spec.resolution.width && p.y >= 0.0 && p.y < spec.resolution.height;
}

Rgb background_at(const SceneSpec& spec, int row, int col) {
  const auto& bg = spec.background;
  const double t = spec.resolution.height > 1 ? static_cast<double>(row) / (spec.resolution.height - 1) : 0.0;
  Rgb c{bg.top.r + (bg.bottom.r - bg.top.r) * t, bg.top.g + (bg.bottom.g - bg.top.g) * t,
        bg.top.b + (bg.bottom.b - bg.top.b) * t};
  const double table_y = spec.physics.table_y;
  if (table_y > 0.0 && row >= table_y) {
    c = row < table_y + 1.0 ? Rgb{0.8, 0.8, 0.8} : bg.table;
  }
  const double two_pi = 2.0 * std::numbers::pi;
  const double tex = bg.texture_amplitude * std::sin(two_pi * col / bg.texture_period + bg.texture_phase) *
                     std::sin(two_pi * row / (0.7 * bg.texture_period) + 0.5 * bg.texture_phase);
  return {c.r + tex, c.g + tex, c.b + tex};
}

}  // namespace

std::vector<float> ball_coverage(const SceneSpec& spec, Point ball) {
  const int h = spec.resolution.height, w = spec.resolution.width;
  std::vector<float> cov(static_cast<std::size_t>(h) * w, 0.0f);
  if (!std::isfinite(ball.x) || !std::isfinite(ball.y)) return cov;
  const PixelBox box = disc_box(spec, ball);
  for (int y = box.y0; y <= box.y1; ++y)
    for (int x = box.x0; x <= box.x1; ++x)
      cov[static_cast<std::size_t>(y) * w + x] = static_cast<float>(pixel_coverage(x, y, ball, spec.ball_radius));
  return cov;
}

double covered_fraction(const SceneSpec& spec, Point ball, const std::vector<OccluderState>& occluders) {
  const PixelBox box = disc_box(spec, ball);
  double total = 0.0, hidden = 0.0;
  for (int y = box.y0; y <= box.y1; ++y) {
    for (int x = box.x0; x <= box.x1; ++x) {
      const double cov = pixel_coverage(x, y, ball, spec.ball_radius);
      if (cov == 0.0) continue;
      total += cov;
      const bool occluded =
          std::any_of(occluders.begin(), occluders.end(), [&](const OccluderState& o) { return o.covers(x, y); });
      if (occluded) hidden += cov;
    }
  }
  return total > 0.0 ? hidden / total : 1.0;
}

Visibility classify_visibility(const SceneSpec& spec, Point ball, const std::vector<OccluderState>& occluders) {
  if (!in_frame(spec, ball)) return Visibility::OutOfFrame;
  const double f = covered_fraction(spec, ball, occluders);
  if (f <= 0.0) return Visibility::Visible;
  if (f >= spec.full_cover_fraction) return Visibility::FullyOccluded;
  return Visibility::PartiallyOccluded;
}

RenderedFrame render_frame(const SceneSpec& spec, Point ball, const std::vector<OccluderState>& occluders,
                           int frame_index, bool draw_ball) {
  const int h = spec.resolution.height, w = spec.resolution.width;
  std::vector<float> cov;
  if (draw_ball) cov = ball_coverage(spec, ball);
  Rng noise(derive_seed(spec.seed, static_cast<std::uint64_t>(frame_index)));
  const double n = spec.noise_level;

  RenderedFrame out{ByteImage(h, w), classify_visibility(spec, ball, occluders)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Rgb c = background_at(spec, y, x);
      if (draw_ball) {
        const double a = cov[static_cast<std::size_t>(y) * w + x];
        if (a > 0.0) {
          c = {c.r + (spec.ball_color.r - c.r) * a, c.g + (spec.ball_color.g - c.g) * a,
               c.b + (spec.ball_color.b - c.b) * a};
        }
      }
      for (const auto& o : occluders)
        if (o.covers(x, y)) c = o.color;
      // Noise is drawn for every pixel so the stream does not depend on scene content.
      const double e0 = uniform(noise, -n, n), e1 = uniform(noise, -n, n), e2 = uniform(noise, -n, n);
      out.image.at(y, x, 0) = to_byte(c.r + e0);
      out.image.at(y, x, 1) = to_byte(c.g + e1);
      out.image.at(y, x, 2) = to_byte(c.b + e2);
    }
  }
  return out;
}

ClipLabels label_clip(const SceneSpec& spec) {
  ClipLabels labels;
  labels.trajectory = gen_trajectory(spec);
  labels.annotations.reserve(labels.trajectory.size());
  for (int f = 0; f < spec.clip_length; ++f) {
    const Point p = labels.trajectory[static_cast<std::size_t>(f)];
    const Visibility v = classify_visibility(spec, p, occluders_at(spec, f));
    labels.annotations.push_back(v == Visibility::OutOfFrame ? BallAnnotation::out_of_frame(f)
                                                             : BallAnnotation{f, p.x, p.y, v});
  }
  return labels;
}

}  // namespace totnet::synth
