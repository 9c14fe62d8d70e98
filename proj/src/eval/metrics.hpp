#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "core/types.hpp"
#include "heatmap/loss.hpp"

namespace totnet::eval {

inline constexpr double kVisibleThreshold = 5.0;
inline constexpr double kOccludedThreshold = 10.0;

double distance(double x_pred, double y_pred, double x_label, double y_label);

/// Correctness radius for in-frame labels: 5 px for Visible/PartiallyOccluded, 10 px for FullyOccluded.
double threshold_for(Visibility v);

struct EvalRecord {
  std::string sample_id;
  Visibility visibility = Visibility::OutOfFrame;
  std::optional<double> dist;  // absent for OutOfFrame labels and for no-ball predictions
  bool no_ball = false;
  bool correct = false;
  std::optional<heatmap::Detection> prediction;
  BallAnnotation label;
};

EvalRecord judge(std::string sample_id, const std::optional<heatmap::Detection>& prediction,
                 const BallAnnotation& label);

struct GroupStats {
  long count = 0;
  std::optional<double> rmse;      // absent when no member carries a distance
  std::optional<double> accuracy;  // absent for an empty group
  std::optional<double> mean_dist;
};

struct Summary {
  std::array<GroupStats, 4> by_visibility;  // indexed by visibility code
  GroupStats overall;

  const GroupStats& operator[](Visibility v) const { return by_visibility[static_cast<std::size_t>(to_code(v))]; }
};

Summary aggregate(const std::vector<EvalRecord>& records);

}  // namespace totnet::eval
