#include "heatmap/loss.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace totnet::heatmap {

namespace {

void check_lengths(const std::vector<double>& p, const std::vector<double>& t, const char* axis) {
  if (p.size() != t.size())
    throw ContractViolation(std::string("prediction/target length mismatch on ") + axis + ": " +
                            std::to_string(p.size()) + " vs " + std::to_string(t.size()));
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw ContractViolation("bce epsilon must lie in (0, 0.5)");
}

// d(bce)/dp for one axis, zero where the clamp is active.
std::vector<double> bce_grad_p(const std::vector<double>& p, const std::vector<double>& t, double eps) {
  const double n = static_cast<double>(p.size());
  std::vector<double> g(p.size(), 0.0);
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] < eps || p[j] > 1.0 - eps) continue;
    g[j] = (-t[j] / p[j] + (1.0 - t[j]) / (1.0 - p[j])) / n;
  }
  return g;
}

std::vector<double> score_grad(const std::vector<double>& p, const std::vector<double>& gp, ActivationMode mode,
                               double scale) {
  std::vector<double> gs(p.size());
  if (mode == ActivationMode::SoftmaxAxial) {
    double dot = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) dot += gp[j] * p[j];
    for (std::size_t j = 0; j < p.size(); ++j) gs[j] = scale * p[j] * (gp[j] - dot);
  } else {
    for (std::size_t j = 0; j < p.size(); ++j) gs[j] = scale * gp[j] * p[j] * (1.0 - p[j]);
  }
  return gs;
}

}  // namespace

std::vector<double> activate(const std::vector<double>& scores, ActivationMode mode) {
  std::vector<double> p(scores.size());
  if (mode == ActivationMode::SoftmaxAxial) {
    if (scores.empty()) return p;
    const double m = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (std::size_t j = 0; j < scores.size(); ++j) z += p[j] = std::exp(scores[j] - m);
    for (auto& e : p) e /= z;
  } else {
    for (std::size_t j = 0; j < scores.size(); ++j) {
      const double s = scores[j];
      p[j] = s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
    }
  }
  return p;
}

AxialPrediction activate(const std::vector<double>& sx, const std::vector<double>& sy, ActivationMode mode) {
  return {activate(sx, mode), activate(sy, mode), mode};
}

double bce(const std::vector<double>& p, const std::vector<double>& t, double eps) {
  check_eps(eps);
  check_lengths(p, t, "axis");
  if (p.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double c = std::clamp(p[j], eps, 1.0 - eps);
    s -= t[j] * std::log(c) + (1.0 - t[j]) * std::log(1.0 - c);
  }
  return s / static_cast<double>(p.size());
}

double weighted_bce_loss(const AxialPrediction& pred, const AxialTargets& target, Visibility visibility,
                         const LossWeights& weights, double eps) {
  check_lengths(pred.px, target.tx, "x");
  check_lengths(pred.py, target.ty, "y");
  const double w = weights[visibility];
  if (w == 0.0) return 0.0;
  return w * (bce(pred.px, target.tx, eps) + bce(pred.py, target.ty, eps));
}

ScoreLoss loss_from_scores(const std::vector<double>& sx, const std::vector<double>& sy, const AxialTargets& target,
                           Visibility visibility, const LossWeights& weights, ActivationMode mode, double eps) {
  const AxialPrediction pred = activate(sx, sy, mode);
  ScoreLoss out;
  out.loss = weighted_bce_loss(pred, target, visibility, weights, eps);
  const double w = weights[visibility];
  if (w == 0.0) {
    out.gx.assign(sx.size(), 0.0);
    out.gy.assign(sy.size(), 0.0);
    return out;
  }
  out.gx = score_grad(pred.px, bce_grad_p(pred.px, target.tx, eps), mode, w);
  out.gy = score_grad(pred.py, bce_grad_p(pred.py, target.ty, eps), mode, w);
  return out;
}

double batch_loss(const std::vector<AxialPrediction>& preds, const std::vector<AxialTargets>& targets,
                  const std::vector<Visibility>& visibilities, const LossWeights& weights, double eps) {
  TOTNET_EXPECT(!preds.empty(), "batch_loss on an empty batch");
  TOTNET_EXPECT(preds.size() == targets.size() && preds.size() == visibilities.size(),
                "batch_loss inputs differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += weighted_bce_loss(preds[i], targets[i], visibilities[i], weights, eps);
  return s / static_cast<double>(preds.size());
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::optional<Detection> decode(const AxialPrediction& pred, double tau) {
  if (pred.px.empty() || pred.py.empty()) return std::nullopt;
  const int ix = argmax(pred.px), iy = argmax(pred.py);
  const double conf = std::min(pred.px[static_cast<std::size_t>(ix)], pred.py[static_cast<std::size_t>(iy)]);
  if (conf < tau) return std::nullopt;
  return Detection{static_cast<double>(ix), static_cast<double>(iy), conf};
}

}  // namespace totnet::heatmap
