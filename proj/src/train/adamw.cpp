#include "train/adamw.hpp"

#include <cmath>
#include <numbers>

#include "core/errors.hpp"

namespace totnet {

AdamW::AdamW(NamedTensors params, const OptimizerConfig& config) : params_(std::move(params)), config_(config) {
  for (const auto& [name, p] : params_) {
    m_.push_back(torch::zeros_like(p));
    v_.push_back(torch::zeros_like(p));
    decay_.push_back(p.dim() > 1);
  }
}

void AdamW::zero_grad() {
  for (auto& [name, p] : params_)
    if (p.grad().defined()) p.mutable_grad().zero_();
}

double AdamW::grad_norm() const {
  double sq = 0.0;
  for (const auto& [name, p] : params_)
    if (p.grad().defined()) sq += p.grad().to(torch::kDouble).pow(2).sum().item<double>();
  return std::sqrt(sq);
}

double AdamW::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / (norm + 1e-12);
    for (auto& [name, p] : params_)
      if (p.grad().defined()) p.mutable_grad().mul_(scale);
  }
  return norm;
}

void AdamW::step(double lr) {
  torch::NoGradGuard no_grad;
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    torch::Tensor& p = params_[i].second;
    if (decay_[i] && config_.weight_decay != 0.0) p.mul_(1.0 - lr * config_.weight_decay);
    const torch::Tensor g = p.grad().defined() ? p.grad() : torch::zeros_like(p);
    m_[i].mul_(b1).add_(g, 1.0 - b1);
    v_[i].mul_(b2).addcmul_(g, g, 1.0 - b2);
    const torch::Tensor denom = (v_[i] / c2).sqrt_().add_(config_.eps);
    p.addcdiv_(m_[i], denom, -lr / c1);
  }
}

NamedTensors AdamW::state() const {
  NamedTensors out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    out.emplace_back(params_[i].first + ".m", m_[i]);
    out.emplace_back(params_[i].first + ".v", v_[i]);
  }
  return out;
}

void AdamW::load_state(const NamedTensors& moments, std::int64_t steps) {
  if (moments.size() != 2 * params_.size())
    throw CheckpointError("optimizer", "expected " + std::to_string(2 * params_.size()) + " moment tensors, found " +
                                           std::to_string(moments.size()));
  torch::NoGradGuard no_grad;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& m = moments[2 * i];
    const auto& v = moments[2 * i + 1];
    if (m.first != params_[i].first + ".m" || v.first != params_[i].first + ".v")
      throw CheckpointError("optimizer", "moment order does not match parameter '" + params_[i].first + "'");
    if (!m.second.sizes().equals(m_[i].sizes()) || !v.second.sizes().equals(v_[i].sizes()))
      throw CheckpointError("optimizer", "moment shape mismatch for '" + params_[i].first + "'");
    m_[i].copy_(m.second);
    v_[i].copy_(v.second);
  }
  steps_ = steps;
}

double scheduled_lr(const OptimizerConfig& config, std::int64_t step, std::int64_t total_steps) {
  if (config.schedule != "cosine" || total_steps <= 0) return config.lr;
  const double t = std::min(1.0, static_cast<double>(step) / static_cast<double>(total_steps));
  return config.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace totnet
