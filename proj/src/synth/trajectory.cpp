#include <cmath>
#include <limits>

#include "core/errors.hpp"
#include "synth/scene.hpp"

namespace totnet::synth {

namespace {

constexpr double kNoEvent = std::numeric_limits<double>::infinity();
constexpr double kMinStep = 1e-12;

// Earliest t in (0, horizon] at which y + vy t + g t^2 / 2 reaches `floor` while descending.
double floor_hit_time(double y, double vy, double g, double floor, double horizon) {
  const double c = y - floor;  // <= 0 while above the floor
  if (c > 0.0) return kNoEvent;
  double t = kNoEvent;
  if (g <= 0.0) {
    if (vy > 0.0) t = -c / vy;
  } else {
    // Positive root of g/2 t^2 + vy t + c = 0, in the cancellation-free form.
    const double s = std::sqrt(vy * vy - 2.0 * g * c);
    t = vy >= 0.0 ? -2.0 * c / (vy + s) : (s - vy) / g;
  }
  return (t > kMinStep && t <= horizon) ? t : kNoEvent;
}

double wall_hit_time(double x, double vx, double left, double right, double horizon) {
  double t = kNoEvent;
  if (vx > 0.0 && x < right) t = (right - x) / vx;
  if (vx < 0.0 && x > left) t = (left - x) / vx;
  return (t > kMinStep && t <= horizon) ? t : kNoEvent;
}

}  // namespace

std::vector<Point> gen_trajectory(const SceneSpec& spec) {
  const auto& p = spec.physics;
  TOTNET_EXPECT(std::isfinite(p.x0) && std::isfinite(p.y0) && std::isfinite(p.vx0) && std::isfinite(p.vy0) &&
                    std::isfinite(p.gravity) && std::isfinite(p.restitution),
                "trajectory parameters must be finite");
  const bool has_floor = p.table_y > 0.0;
  const double floor = p.table_y - spec.ball_radius;
  const double left = spec.ball_radius;
  const double right = spec.resolution.width - 1.0 - spec.ball_radius;

  double x = p.x0, y = p.y0, vx = p.vx0, vy = p.vy0;
  const double g = p.gravity;
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(spec.clip_length));
  for (int frame = 0; frame < spec.clip_length; ++frame) {
    out.push_back({x, y});
    double remaining = 1.0;
    for (int events = 0; events < 16 && remaining > 0.0; ++events) {
      const double tf = has_floor ? floor_hit_time(y, vy, g, floor, remaining) : kNoEvent;
      const double tw = p.side_walls ? wall_hit_time(x, vx, left, right, remaining) : kNoEvent;
      const double dt = std::min({tf, tw, remaining});
      x += vx * dt;
      y += vy * dt + 0.5 * g * dt * dt;
      vy += g * dt;
      remaining -= dt;
      if (dt == tf) {
        y = floor;
        vy = -p.restitution * vy;
      } else if (dt == tw) {
        vx = -vx;
        if (p.hit_lift > 0.0) vy = -p.hit_lift;
      }
    }
    if (has_floor && y > floor) {  // resting or tunnelled numerically
      y = floor;
      vy = std::min(vy, 0.0);
    }
  }
  return out;
}

std::vector<OccluderState> occluders_at(const SceneSpec& spec, int frame) {
  std::vector<OccluderState> out;
  out.reserve(spec.occluders.size());
  for (const auto& o : spec.occluders) {
    out.push_back({o.shape, o.cx + o.vx * frame, o.cy + o.vy * frame, o.half_w, o.half_h, o.color});
  }
  return out;
}

bool OccluderState::covers(double px, double py) const noexcept {
  const double dx = px - cx, dy = py - cy;
  if (shape == OccluderShape::Rectangle) return std::abs(dx) <= half_w && std::abs(dy) <= half_h;
  const double u = dx / half_w, v = dy / half_h;
  return u * u + v * v <= 1.0;
}

void SceneSpec::validate(int min_length) const {
  if (resolution.height < 1 || resolution.width < 1) throw ValidationError("scene resolution must be positive");
  if (!(ball_radius >= 1.0)) throw ValidationError("scene ball_radius must be >= 1");
  if (clip_length < min_length) {
    throw ValidationError("scene clip_length " + std::to_string(clip_length) + " shorter than window length " +
                          std::to_string(min_length));
  }
  if (!(physics.restitution >= 0.0 && physics.restitution <= 1.0))
    throw ValidationError("scene restitution must lie in [0, 1]");
  if (!(full_cover_fraction > 0.0 && full_cover_fraction <= 1.0))
    throw ValidationError("scene full_cover_fraction must lie in (0, 1]");
  for (const auto& o : occluders)
    if (!(o.half_w > 0.0 && o.half_h > 0.0)) throw ValidationError("occluder extents must be positive");
}

}  // namespace totnet::synth
