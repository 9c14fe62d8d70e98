#pragma once

#include <optional>
#include <vector>

#include "core/config.hpp"
#include "heatmap/targets.hpp"

namespace totnet::heatmap {

struct AxialPrediction {
  std::vector<double> px;  // length W
  std::vector<double> py;  // length H
  ActivationMode mode = ActivationMode::SoftmaxAxial;
};

/// Softmax over the whole vector, or elementwise logistic.
std::vector<double> activate(const std::vector<double>& scores, ActivationMode mode);
AxialPrediction activate(const std::vector<double>& sx, const std::vector<double>& sy, ActivationMode mode);

/// Mean over entries of -[t log p + (1-t) log(1-p)] with p clamped to [eps, 1-eps].
double bce(const std::vector<double>& p, const std::vector<double>& t, double eps);

double weighted_bce_loss(const AxialPrediction& pred, const AxialTargets& target, Visibility visibility,
                         const LossWeights& weights, double eps);

/// Loss of one sample together with its gradient with respect to the pre-activation scores.
struct ScoreLoss {
  double loss = 0.0;
  std::vector<double> gx;
  std::vector<double> gy;
};

ScoreLoss loss_from_scores(const std::vector<double>& sx, const std::vector<double>& sy, const AxialTargets& target,
                           Visibility visibility, const LossWeights& weights, ActivationMode mode, double eps);

/// Mean of the per-sample weighted losses; zero-weight samples still count in the denominator.
double batch_loss(const std::vector<AxialPrediction>& preds, const std::vector<AxialTargets>& targets,
                  const std::vector<Visibility>& visibilities, const LossWeights& weights, double eps);

struct Detection {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;
};

/// Argmax on each axis (lowest index wins ties); confidence is the smaller of the two peaks.
/// Returns nullopt (no ball) when the confidence is below tau.
std::optional<Detection> decode(const AxialPrediction& pred, double tau);

/// Index of the first maximum.
int argmax(const std::vector<double>& v);

}  // namespace totnet::heatmap
