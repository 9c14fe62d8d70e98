#include "augment/augment.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace totnet::augment {

namespace {

struct Bounds {
  int y0, y1, x0, x1;  // inclusive; empty when y0 > y1 or x0 > x1
};

Bounds clip_bounds(const ByteImage& img, double cx, double cy, double hw, double hh) {
  return {std::max(0, static_cast<int>(std::floor(cy - hh))),
          std::min(img.height - 1, static_cast<int>(std::ceil(cy + hh))),
          std::max(0, static_cast<int>(std::floor(cx - hw))),
          std::min(img.width - 1, static_cast<int>(std::ceil(cx + hw)))};
}

Region sample_region(Rng& rng, const std::vector<MaskShape>& shapes, double diameter, double smin, double smax,
                     double cx, double cy) {
  Region r;
  r.shape = shapes.empty() ? MaskShape::Rectangle : shapes[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(shapes.size()) - 1))];
  r.half_w = 0.5 * diameter * uniform(rng, smin, smax);
  r.half_h = 0.5 * diameter * uniform(rng, smin, smax);
  r.cx = cx;
  r.cy = cy;
  return r;
}

std::array<std::uint8_t, 3> round_mean(const std::array<double, 3>& m) {
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) out[c] = static_cast<std::uint8_t>(std::clamp(std::lround(m[c]), 0L, 255L));
  return out;
}

double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

}  // namespace

bool Region::contains(double x, double y) const noexcept {
  const double dx = x - cx, dy = y - cy;
  if (shape == MaskShape::Rectangle) return std::abs(dx) <= half_w && std::abs(dy) <= half_h;
  const double u = dx / half_w, v = dy / half_h;
  return u * u + v * v <= 1.0;
}

bool Region::in_ring(double x, double y, int margin) const noexcept {
  if (contains(x, y)) return false;
  const Region grown{shape, cx, cy, half_w + margin, half_h + margin};
  return grown.contains(x, y);
}

std::array<double, 3> ring_mean(const ByteImage& image, const Region& region, int margin) {
  const Bounds b = clip_bounds(image, region.cx, region.cy, region.half_w + margin, region.half_h + margin);
  std::array<double, 3> sum{};
  long n = 0;
  for (int y = b.y0; y <= b.y1; ++y) {
    for (int x = b.x0; x <= b.x1; ++x) {
      if (!region.in_ring(x, y, margin)) continue;
      for (int c = 0; c < 3; ++c) sum[c] += image.at(y, x, c);
      ++n;
    }
  }
  if (n == 0) {
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x)
        for (int c = 0; c < 3; ++c) sum[c] += image.at(y, x, c);
    n = static_cast<long>(image.height) * image.width;
  }
  for (auto& s : sum) s /= static_cast<double>(std::max(n, 1L));
  return sum;
}

void fill_region(ByteImage& image, const Region& region, const std::array<std::uint8_t, 3>& value) {
  const Bounds b = clip_bounds(image, region.cx, region.cy, region.half_w, region.half_h);
  for (int y = b.y0; y <= b.y1; ++y)
    for (int x = b.x0; x <= b.x1; ++x)
      if (region.contains(x, y))
        for (int c = 0; c < 3; ++c) image.at(y, x, c) = value[c];
}

FrameWindow occlude_target(FrameWindow window, Rng& rng, const OcclusionParams& params, Counters* counters,
                           Region* sampled) {
  const BallAnnotation& t = window.target();
  if (t.visibility != Visibility::Visible && t.visibility != Visibility::PartiallyOccluded) {
    if (counters) ++counters->occlusion_noops;
    return window;
  }
  const Region region = sample_region(rng, params.shapes, 2.0 * params.ball_radius, params.scale_min,
                                      params.scale_max, t.x, t.y);
  ByteImage& frame = window.frames.at(static_cast<std::size_t>(window.target_index));
  fill_region(frame, region, round_mean(ring_mean(frame, region, params.ring_margin)));
  if (sampled) *sampled = region;
  return window;
}

bool in_ball_guard(const BallAnnotation& ann, double ball_radius, double x, double y) noexcept {
  if (!ann.in_frame()) return false;
  const double dx = x - ann.x, dy = y - ann.y, r = ball_radius + 1.0;
  return dx * dx + dy * dy <= r * r;
}

FrameWindow add_decoy_patches(FrameWindow window, Rng& rng, const DecoyParams& params, Counters* counters) {
  const std::vector<MaskShape> shapes = {MaskShape::Rectangle, MaskShape::Ellipse};
  for (int f = 0; f < window.length(); ++f) {
    if (f == window.target_index) continue;
    ByteImage& frame = window.frames[static_cast<std::size_t>(f)];
    const BallAnnotation& ball = window.annotations[static_cast<std::size_t>(f)];
    const int count = uniform_int(rng, params.count_min, params.count_max);
    for (int k = 0; k < count; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < params.max_attempts && !placed; ++attempt) {
        const Region r = sample_region(rng, shapes, 2.0 * params.ball_radius, params.scale_min, params.scale_max,
                                       uniform(rng, 0.0, frame.width), uniform(rng, 0.0, frame.height));
        const Bounds b = clip_bounds(frame, r.cx, r.cy, r.half_w, r.half_h);
        bool hits_ball = false;
        for (int y = b.y0; y <= b.y1 && !hits_ball; ++y)
          for (int x = b.x0; x <= b.x1 && !hits_ball; ++x)
            hits_ball = r.contains(x, y) && in_ball_guard(ball, params.ball_radius, x, y);
        if (hits_ball) continue;
        fill_region(frame, r, round_mean(ring_mean(frame, r, params.ring_margin)));
        placed = true;
      }
      if (!placed && counters) ++counters->decoys_dropped;
    }
  }
  return window;
}

FrameWindow hflip(FrameWindow window) {
  for (auto& img : window.frames) {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width / 2; ++x)
        for (int c = 0; c < 3; ++c) std::swap(img.at(y, x, c), img.at(y, img.width - 1 - x, c));
  }
  const int w = window.resolution().width;
  for (auto& a : window.annotations)
    if (a.in_frame()) a.x = w - 1 - a.x;
  return window;
}

FrameWindow vflip(FrameWindow window) {
  for (auto& img : window.frames) {
    for (int y = 0; y < img.height / 2; ++y)
      for (int x = 0; x < img.width; ++x)
        for (int c = 0; c < 3; ++c) std::swap(img.at(y, x, c), img.at(img.height - 1 - y, x, c));
  }
  const int h = window.resolution().height;
  for (auto& a : window.annotations)
    if (a.in_frame()) a.y = h - 1 - a.y;
  return window;
}

FrameWindow crop_resize(FrameWindow window, const CropBox& box, Interpolation interpolation) {
  const Resolution res = window.resolution();
  TOTNET_EXPECT(box.height > 0 && box.width > 0 && box.top >= 0 && box.left >= 0 &&
                    box.top + box.height <= res.height && box.left + box.width <= res.width,
                "crop box outside the frame");
  const double sy = static_cast<double>(box.height) / res.height;
  const double sx = static_cast<double>(box.width) / res.width;
  for (auto& img : window.frames) {
    ByteImage out(res.height, res.width);
    for (int y = 0; y < res.height; ++y) {
      const double fy = y * sy;  // source offset inside the crop
      for (int x = 0; x < res.width; ++x) {
        const double fx = x * sx;
        if (interpolation == Interpolation::Nearest) {
          // floor(offset + 1/2) in exact integer arithmetic.
          const long long ry = (2LL * y * box.height + res.height) / (2LL * res.height);
          const long long rx = (2LL * x * box.width + res.width) / (2LL * res.width);
          const int ny = box.top + static_cast<int>(std::min<long long>(box.height - 1, ry));
          const int nx = box.left + static_cast<int>(std::min<long long>(box.width - 1, rx));
          for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(ny, nx, c);
        } else {
          const int y0 = static_cast<int>(std::floor(fy)), x0 = static_cast<int>(std::floor(fx));
          const double wy = fy - y0, wx = fx - x0;
          const int ya = box.top + std::min(y0, box.height - 1), yb = box.top + std::min(y0 + 1, box.height - 1);
          const int xa = box.left + std::min(x0, box.width - 1), xb = box.left + std::min(x0 + 1, box.width - 1);
          for (int c = 0; c < 3; ++c) {
            const double v = (1 - wy) * ((1 - wx) * img.at(ya, xa, c) + wx * img.at(ya, xb, c)) +
                             wy * ((1 - wx) * img.at(yb, xa, c) + wx * img.at(yb, xb, c));
            out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
          }
        }
      }
    }
    img = std::move(out);
  }
  for (auto& a : window.annotations) {
    if (!a.in_frame()) continue;
    const double nx = (a.x - box.left) * res.width / box.width;
    const double ny = (a.y - box.top) * res.height / box.height;
    if (nx >= 0.0 && nx < res.width && ny >= 0.0 && ny < res.height) {
      a.x = nx;
      a.y = ny;
    } else {
      a = BallAnnotation::out_of_frame(a.frame_index);
    }
  }
  return window;
}

FrameWindow color_jitter(FrameWindow window, double brightness, double contrast, double saturation) {
  for (auto& img : window.frames) {
    const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
    std::vector<double> px(n * 3);
    double gray_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) px[i * 3 + c] = img.data[i * 3 + c] * brightness;
      gray_sum += luma(px[i * 3], px[i * 3 + 1], px[i * 3 + 2]);
    }
    const double gray_mean = n ? gray_sum / static_cast<double>(n) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double* p = &px[i * 3];
      for (int c = 0; c < 3; ++c) p[c] = (p[c] - gray_mean) * contrast + gray_mean;
      const double g = luma(p[0], p[1], p[2]);
      for (int c = 0; c < 3; ++c) {
        const double v = g + (p[c] - g) * saturation;
        img.data[i * 3 + c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return window;
}

FrameWindow geometric_augment(FrameWindow window, Rng& rng, const GeometricParams& params, Counters* counters) {
  if (bernoulli(rng, params.hflip_prob)) window = hflip(std::move(window));
  if (bernoulli(rng, params.vflip_prob)) window = vflip(std::move(window));
  if (bernoulli(rng, params.crop_prob)) {
    const Resolution res = window.resolution();
    const BallAnnotation& t = window.target();
    bool done = false;
    for (int attempt = 0; attempt < params.max_crop_attempts && !done; ++attempt) {
      const double s = uniform(rng, params.crop_min_scale, 1.0);
      CropBox box;
      box.height = std::max(1, static_cast<int>(std::lround(s * res.height)));
      box.width = std::max(1, static_cast<int>(std::lround(s * res.width)));
      box.top = uniform_int(rng, 0, res.height - box.height);
      box.left = uniform_int(rng, 0, res.width - box.width);
      const double r = params.ball_radius;
      const bool keeps_target = !t.in_frame() || (t.x - r >= box.left && t.x + r < box.left + box.width &&
                                                  t.y - r >= box.top && t.y + r < box.top + box.height);
      if (!keeps_target) continue;
      window = crop_resize(std::move(window), box, params.interpolation);
      done = true;
    }
    if (!done && counters) ++counters->crops_skipped;
  }
  if (bernoulli(rng, params.jitter_prob)) {
    const double b = uniform(rng, 1.0 - params.brightness, 1.0 + params.brightness);
    const double c = uniform(rng, 1.0 - params.contrast, 1.0 + params.contrast);
    const double s = uniform(rng, 1.0 - params.saturation, 1.0 + params.saturation);
    window = color_jitter(std::move(window), b, c, s);
  }
  return window;
}

FrameWindow compose(const std::vector<Op>& pipeline, FrameWindow window, Rng& rng) {
  for (const auto& op : pipeline) {
    TOTNET_EXPECT(op.probability >= 0.0 && op.probability <= 1.0, "op probability outside [0, 1]: " + op.name);
    if (!bernoulli(rng, op.probability)) continue;
    window = op.apply(std::move(window), rng);
    window.applied_ops.push_back(op.name);
  }
  return window;
}

OcclusionParams occlusion_params(const AugmentConfig& a) {
  OcclusionParams p;
  p.ball_radius = a.ball_radius;
  p.scale_min = a.mask_scale_min;
  p.scale_max = a.mask_scale_max;
  p.ring_margin = a.ring_margin;
  return p;
}

DecoyParams decoy_params(const AugmentConfig& a) {
  DecoyParams p;
  p.ball_radius = a.ball_radius;
  p.count_min = a.decoy_count_min;
  p.count_max = a.decoy_count_max;
  p.scale_min = a.mask_scale_min;
  p.scale_max = a.mask_scale_max;
  p.ring_margin = a.ring_margin;
  return p;
}

std::vector<Op> training_pipeline(const PipelineConfig& config, Counters* counters) {
  const AugmentConfig& a = config.augment;
  std::vector<Op> ops;
  ops.push_back({"hflip", a.hflip_prob, [](FrameWindow w, Rng&) { return hflip(std::move(w)); }});
  ops.push_back({"vflip", a.vflip_prob, [](FrameWindow w, Rng&) { return vflip(std::move(w)); }});
  GeometricParams crop_only;
  crop_only.hflip_prob = crop_only.vflip_prob = crop_only.jitter_prob = 0.0;
  crop_only.crop_prob = 1.0;
  crop_only.crop_min_scale = a.crop_min_scale;
  crop_only.interpolation = a.interpolation;
  crop_only.ball_radius = a.ball_radius;
  ops.push_back({"crop_resize", a.crop_prob,
                 [crop_only, counters](FrameWindow w, Rng& rng) { return geometric_augment(std::move(w), rng, crop_only, counters); }});
  GeometricParams jitter_only;
  jitter_only.hflip_prob = jitter_only.vflip_prob = jitter_only.crop_prob = 0.0;
  jitter_only.jitter_prob = 1.0;
  jitter_only.brightness = a.brightness;
  jitter_only.contrast = a.contrast;
  jitter_only.saturation = a.saturation;
  ops.push_back({"color_jitter", a.jitter_prob,
                 [jitter_only](FrameWindow w, Rng& rng) { return geometric_augment(std::move(w), rng, jitter_only); }});
  if (config.use_occlusion_aug) {
    const OcclusionParams occ = occlusion_params(a);
    const DecoyParams dec = decoy_params(a);
    ops.push_back({"occlude_target", a.occlusion_prob,
                   [occ, counters](FrameWindow w, Rng& rng) { return occlude_target(std::move(w), rng, occ, counters); }});
    ops.push_back({"decoys", a.decoy_prob,
                   [dec, counters](FrameWindow w, Rng& rng) { return add_decoy_patches(std::move(w), rng, dec, counters); }});
  }
  return ops;
}

}  // namespace totnet::augment
