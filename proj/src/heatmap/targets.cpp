#include "heatmap/targets.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace totnet::heatmap {

namespace {

void check_coord(double v, int n, const char* axis) {
  if (!(std::isfinite(v) && v >= 0.0 && v < n))
    throw ContractViolation(std::string(axis) + " coordinate " + std::to_string(v) + " outside [0, " +
                            std::to_string(n) + ")");
}

std::vector<double> gaussian_axis(double center, double sigma, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  double z = 0.0;
  for (int j = 0; j < n; ++j) {
    const double d = j - center;
    v[static_cast<std::size_t>(j)] = std::exp(-d * d / (2.0 * sigma * sigma));
    z += v[static_cast<std::size_t>(j)];
  }
  if (z <= 0.0) {
    // Underflow for tiny sigma: the limit is the one-hot at the nearest index.
    std::fill(v.begin(), v.end(), 0.0);
    v[static_cast<std::size_t>(axis_index(center, n))] = 1.0;
    return v;
  }
  for (auto& e : v) e /= z;
  return v;
}

}  // namespace

int axis_index(double coord, int n) {
  const double r = std::nearbyint(coord);
  return static_cast<int>(std::clamp(r, 0.0, static_cast<double>(n - 1)));
}

AxialTargets make_onehot(double x, double y, int width, int height) {
  check_coord(x, width, "x");
  check_coord(y, height, "y");
  AxialTargets t;
  t.kind = TargetKind::OneHot;
  t.tx.assign(static_cast<std::size_t>(width), 0.0);
  t.ty.assign(static_cast<std::size_t>(height), 0.0);
  t.tx[static_cast<std::size_t>(axis_index(x, width))] = 1.0;
  t.ty[static_cast<std::size_t>(axis_index(y, height))] = 1.0;
  return t;
}

AxialTargets make_gaussian(double x, double y, double sigma, int width, int height) {
  if (!(sigma > 0.0)) throw ContractViolation("gaussian sigma must be > 0, got " + std::to_string(sigma));
  check_coord(x, width, "x");
  check_coord(y, height, "y");
  return {gaussian_axis(x, sigma, width), gaussian_axis(y, sigma, height), TargetKind::Gaussian};
}

AxialTargets make_no_target(int width, int height) {
  return {std::vector<double>(static_cast<std::size_t>(width), 0.0),
          std::vector<double>(static_cast<std::size_t>(height), 0.0), TargetKind::NoTarget};
}

AxialTargets build_target(const BallAnnotation& ann, const PipelineConfig& config) {
  switch (ann.visibility) {
    case Visibility::Visible:
    case Visibility::PartiallyOccluded:
      return make_onehot(ann.x, ann.y, config.width, config.height);
    case Visibility::FullyOccluded:
      return make_gaussian(ann.x, ann.y, config.sigma, config.width, config.height);
    case Visibility::OutOfFrame:
      break;
  }
  return make_no_target(config.width, config.height);
}

}  // namespace totnet::heatmap
