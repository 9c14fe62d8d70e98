#include "eval/metrics.hpp"

#include <cmath>

namespace totnet::eval {

namespace {

struct Accum {
  long count = 0;
  long correct = 0;
  long with_dist = 0;
  double sq = 0.0;
  double sum = 0.0;

  void add(const EvalRecord& r) {
    ++count;
    if (r.correct) ++correct;
    if (r.dist) {
      ++with_dist;
      sq += *r.dist * *r.dist;
      sum += *r.dist;
    }
  }

  GroupStats finish() const {
    GroupStats g;
    g.count = count;
    if (count > 0) g.accuracy = static_cast<double>(correct) / static_cast<double>(count);
    if (with_dist > 0) {
      g.rmse = std::sqrt(sq / static_cast<double>(with_dist));
      g.mean_dist = sum / static_cast<double>(with_dist);
    }
    return g;
  }
};

}  // namespace

double distance(double x_pred, double y_pred, double x_label, double y_label) {
  const double dx = x_pred - x_label, dy = y_pred - y_label;
  return std::sqrt(dx * dx + dy * dy);
}

double threshold_for(Visibility v) {
  return v == Visibility::FullyOccluded ? kOccludedThreshold : kVisibleThreshold;
}

EvalRecord judge(std::string sample_id, const std::optional<heatmap::Detection>& prediction,
                 const BallAnnotation& label) {
  EvalRecord r;
  r.sample_id = std::move(sample_id);
  r.visibility = label.visibility;
  r.no_ball = !prediction.has_value();
  r.prediction = prediction;
  r.label = label;
  if (!label.in_frame()) {
    r.correct = r.no_ball;
    return r;
  }
  if (r.no_ball) return r;
  r.dist = distance(prediction->x, prediction->y, label.x, label.y);
  r.correct = *r.dist <= threshold_for(label.visibility);
  return r;
}

Summary aggregate(const std::vector<EvalRecord>& records) {
  std::array<Accum, 4> groups{};
  Accum all;
  for (const auto& r : records) {
    groups[static_cast<std::size_t>(to_code(r.visibility))].add(r);
    all.add(r);
  }
  Summary s;
  for (std::size_t i = 0; i < 4; ++i) s.by_visibility[i] = groups[i].finish();
  s.overall = all.finish();
  return s;
}

}  // namespace totnet::eval
