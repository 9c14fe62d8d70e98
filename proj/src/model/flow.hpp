#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "core/types.hpp"
#include "synth/scene.hpp"

namespace totnet {

/// (T-1) x H x W x 2 displacement field; entry t maps frame t to frame t+1, (dx, dy) in pixels.
struct FlowField {
  int pairs = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  FlowField() = default;
  FlowField(int pairs_, int height_, int width_)
      : pairs(pairs_), height(height_), width(width_),
        data(static_cast<std::size_t>(pairs_) * height_ * width_ * 2, 0.0f) {}

  float& dx(int t, int y, int x) { return data[index(t, y, x)]; }
  float& dy(int t, int y, int x) { return data[index(t, y, x) + 1]; }
  float dx(int t, int y, int x) const { return data[index(t, y, x)]; }
  float dy(int t, int y, int x) const { return data[index(t, y, x) + 1]; }

 private:
  std::size_t index(int t, int y, int x) const {
    return ((static_cast<std::size_t>(t) * height + y) * width + x) * 2;
  }
};

class FlowProvider {
 public:
  virtual ~FlowProvider() = default;
  virtual FlowField compute(const FrameWindow& window) const = 0;
};

struct BlockMatchingParams {
  int levels = 3;
  int block = 6;
  int coarse_radius = 4;  // search radius at the coarsest level
  int refine_radius = 2;  // search radius at every finer level
  double motion_penalty = 0.05;  // per squared pixel of displacement, breaks ties toward no motion
};

/// Coarse-to-fine SAD block matching on luma; piecewise-constant per block, integer displacements.
class BlockMatchingFlow final : public FlowProvider {
 public:
  explicit BlockMatchingFlow(BlockMatchingParams params = {}) : params_(params) {}
  FlowField compute(const FrameWindow& window) const override;
  FlowField compute_pair(const ByteImage& from, const ByteImage& to) const;

 private:
  BlockMatchingParams params_;
};

/// Exact motion read from the synthetic scene description: ball displacement on ball pixels,
/// occluder velocity on occluder pixels, zero elsewhere. Geometry is that of the unaugmented clip.
class OracleFlow final : public FlowProvider {
 public:
  void add_scene(const synth::SceneSpec& spec);
  FlowField compute(const FrameWindow& window) const override;

 private:
  struct Entry {
    synth::SceneSpec spec;
    std::vector<synth::Point> trajectory;
  };
  std::map<std::string, Entry> scenes_;
};

/// Flow for a window; throws ContractViolation for windows shorter than 2 frames.
FlowField compute_flow(const FrameWindow& window, const FlowProvider& provider);

}  // namespace totnet
