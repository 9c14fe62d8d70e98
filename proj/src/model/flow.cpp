#include "model/flow.hpp"

#include <cmath>
#include <limits>

#include <opencv2/imgproc.hpp>

#include "core/errors.hpp"

namespace totnet {

namespace {

cv::Mat luma(const ByteImage& img) {
  cv::Mat rgb(img.height, img.width, CV_8UC3, const_cast<std::uint8_t*>(img.data.data()));
  cv::Mat gray;
  cv::cvtColor(rgb, gray, cv::COLOR_RGB2GRAY);
  cv::Mat f;
  gray.convertTo(f, CV_32F);
  return f;
}

struct Vec2i {
  int dx = 0, dy = 0;
};

// Block vectors on a grid of ceil(h/b) x ceil(w/b).
std::vector<Vec2i> match_level(const cv::Mat& a, const cv::Mat& b, int block, int radius, double penalty,
                               const std::vector<Vec2i>& guess, int gh, int gw) {
  std::vector<Vec2i> out(static_cast<std::size_t>(gh) * gw);
  const int h = a.rows, w = a.cols;
  for (int by = 0; by < gh; ++by) {
    for (int bx = 0; bx < gw; ++bx) {
      const Vec2i g = guess.empty() ? Vec2i{} : guess[static_cast<std::size_t>(by) * gw + bx];
      const int y0 = by * block, x0 = bx * block;
      const int y1 = std::min(h, y0 + block), x1 = std::min(w, x0 + block);
      double best = std::numeric_limits<double>::infinity();
      Vec2i best_v = g;
      for (int dy = g.dy - radius; dy <= g.dy + radius; ++dy) {
        for (int dx = g.dx - radius; dx <= g.dx + radius; ++dx) {
          double sad = 0.0;
          int n = 0;
          for (int y = y0; y < y1; ++y) {
            const int ty = std::clamp(y + dy, 0, h - 1);
            const float* ra = a.ptr<float>(y);
            const float* rb = b.ptr<float>(ty);
            for (int x = x0; x < x1; ++x) {
              sad += std::abs(ra[x] - rb[std::clamp(x + dx, 0, w - 1)]);
              ++n;
            }
          }
          const double cost = sad / std::max(n, 1) + penalty * (dx * dx + dy * dy);
          if (cost < best) {
            best = cost;
            best_v = {dx, dy};
          }
        }
      }
      out[static_cast<std::size_t>(by) * gw + bx] = best_v;
    }
  }
  return out;
}

}  // namespace

FlowField BlockMatchingFlow::compute_pair(const ByteImage& from, const ByteImage& to) const {
  TOTNET_EXPECT(from.resolution() == to.resolution(), "flow frames differ in size");
  std::vector<cv::Mat> pa{luma(from)}, pb{luma(to)};
  for (int l = 1; l < params_.levels; ++l) {
    if (pa.back().rows < 2 * params_.block || pa.back().cols < 2 * params_.block) break;
    cv::Mat da, db;
    cv::pyrDown(pa.back(), da);
    cv::pyrDown(pb.back(), db);
    pa.push_back(da);
    pb.push_back(db);
  }
  const int b = params_.block;
  std::vector<Vec2i> guess;
  int pgh = 0, pgw = 0;
  for (int l = static_cast<int>(pa.size()) - 1; l >= 0; --l) {
    const int gh = (pa[l].rows + b - 1) / b, gw = (pa[l].cols + b - 1) / b;
    std::vector<Vec2i> init;
    if (!guess.empty()) {
      init.resize(static_cast<std::size_t>(gh) * gw);
      for (int y = 0; y < gh; ++y)
        for (int x = 0; x < gw; ++x) {
          const Vec2i c = guess[static_cast<std::size_t>(std::min(y / 2, pgh - 1)) * pgw + std::min(x / 2, pgw - 1)];
          init[static_cast<std::size_t>(y) * gw + x] = {2 * c.dx, 2 * c.dy};
        }
    }
    const int radius = guess.empty() ? params_.coarse_radius : params_.refine_radius;
    guess = match_level(pa[l], pb[l], b, radius, params_.motion_penalty, init, gh, gw);
    pgh = gh;
    pgw = gw;
  }
  FlowField f(1, from.height, from.width);
  for (int y = 0; y < from.height; ++y)
    for (int x = 0; x < from.width; ++x) {
      const Vec2i v = guess[static_cast<std::size_t>(y / b) * pgw + x / b];
      f.dx(0, y, x) = static_cast<float>(v.dx);
      f.dy(0, y, x) = static_cast<float>(v.dy);
    }
  return f;
}

FlowField BlockMatchingFlow::compute(const FrameWindow& window) const {
  TOTNET_EXPECT(window.length() >= 2, "flow needs at least 2 frames");
  const Resolution r = window.resolution();
  FlowField out(window.length() - 1, r.height, r.width);
  const std::size_t plane = static_cast<std::size_t>(r.height) * r.width * 2;
  for (int t = 0; t + 1 < window.length(); ++t) {
    const FlowField one = compute_pair(window.frames[static_cast<std::size_t>(t)],
                                       window.frames[static_cast<std::size_t>(t + 1)]);
    std::copy(one.data.begin(), one.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(t * plane));
  }
  return out;
}

void OracleFlow::add_scene(const synth::SceneSpec& spec) {
  scenes_[spec.clip_id] = {spec, synth::gen_trajectory(spec)};
}

FlowField OracleFlow::compute(const FrameWindow& window) const {
  TOTNET_EXPECT(window.length() >= 2, "flow needs at least 2 frames");
  auto it = scenes_.find(window.source_id);
  if (it == scenes_.end()) throw ContractViolation("oracle flow has no scene for clip '" + window.source_id + "'");
  const auto& [spec, traj] = it->second;
  const Resolution r = window.resolution();
  const double sx = static_cast<double>(r.width) / spec.resolution.width;
  const double sy = static_cast<double>(r.height) / spec.resolution.height;
  FlowField out(window.length() - 1, r.height, r.width);
  for (int t = 0; t + 1 < window.length(); ++t) {
    const int f = window.annotations[static_cast<std::size_t>(t)].frame_index;
    TOTNET_EXPECT(f >= 0 && f + 1 < static_cast<int>(traj.size()), "window frame outside the scene");
    const synth::Point p0 = traj[static_cast<std::size_t>(f)], p1 = traj[static_cast<std::size_t>(f + 1)];
    const auto occ = synth::occluders_at(spec, f);
    const double rad = spec.ball_radius;
    for (int y = 0; y < r.height; ++y) {
      for (int x = 0; x < r.width; ++x) {
        const double px = x / sx, py = y / sy;  // scene coordinates
        double dx = 0.0, dy = 0.0;
        if ((px - p0.x) * (px - p0.x) + (py - p0.y) * (py - p0.y) <= rad * rad) {
          dx = p1.x - p0.x;
          dy = p1.y - p0.y;
        }
        for (std::size_t k = 0; k < occ.size(); ++k) {
          if (occ[k].covers(px, py)) {
            dx = spec.occluders[k].vx;
            dy = spec.occluders[k].vy;
          }
        }
        out.dx(t, y, x) = static_cast<float>(dx * sx);
        out.dy(t, y, x) = static_cast<float>(dy * sy);
      }
    }
  }
  return out;
}

FlowField compute_flow(const FrameWindow& window, const FlowProvider& provider) {
  TOTNET_EXPECT(window.length() >= 2, "flow needs at least 2 frames, got " + std::to_string(window.length()));
  return provider.compute(window);
}

}  // namespace totnet
