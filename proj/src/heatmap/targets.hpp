#pragma once

#include <vector>

#include "core/config.hpp"
#include "core/types.hpp"

namespace totnet::heatmap {

enum class TargetKind { OneHot, Gaussian, NoTarget };

struct AxialTargets {
  std::vector<double> tx;  // length W
  std::vector<double> ty;  // length H
  TargetKind kind = TargetKind::NoTarget;
};

/// Nearest integer, ties to even, clamped into [0, n).
int axis_index(double coord, int n);

AxialTargets make_onehot(double x, double y, int width, int height);
/// Gaussian along each axis, normalized over the in-frame indices so truncation at the border still sums to 1.
AxialTargets make_gaussian(double x, double y, double sigma, int width, int height);
AxialTargets make_no_target(int width, int height);

/// Visible/PartiallyOccluded: one-hot; FullyOccluded: Gaussian; OutOfFrame: no target.
AxialTargets build_target(const BallAnnotation& ann, const PipelineConfig& config);

}  // namespace totnet::heatmap
