#include "train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "core/errors.hpp"
#include "eval/report.hpp"
#include "heatmap/loss.hpp"
#include "model/inference.hpp"

namespace totnet {

namespace fs = std::filesystem;

namespace {

std::string window_id(const FrameWindow& w) {
  return w.source_id + ":" + std::to_string(w.target().frame_index);
}

nlohmann::json per_visibility(const eval::Summary& s, bool rmse) {
  nlohmann::json j = nlohmann::json::object();
  for (Visibility v : kAllVisibilities) {
    const auto& g = s[v];
    const auto& value = rmse ? g.rmse : g.accuracy;
    if (g.count > 0) j[std::string(to_string(v))] = value ? nlohmann::json(*value) : nlohmann::json(nullptr);
  }
  return j;
}

}  // namespace

std::vector<int> supervised_frames(const PipelineConfig& config, int window_length) {
  if (config.supervision == Supervision::TargetFrame) return {config.target_index};
  std::vector<int> all(static_cast<std::size_t>(window_length));
  for (int i = 0; i < window_length; ++i) all[static_cast<std::size_t>(i)] = i;
  return all;
}

Trainer::Trainer(const PipelineConfig& config, std::unique_ptr<FlowProvider> flow)
    : config_(config), flow_(std::move(flow)) {
  config_.validate();
  if (config_.num_threads > 0) torch::set_num_threads(config_.num_threads);
  torch::manual_seed(config_.seed);
  model_ = build_model(config_);
  NamedTensors params;
  for (const auto& item : model_->named_parameters()) params.emplace_back(item.key(), item.value());
  optimizer_ = std::make_unique<AdamW>(std::move(params), config_.optimizer);
  if (config_.use_flow && !flow_) flow_ = std::make_unique<BlockMatchingFlow>();
}

std::optional<torch::Tensor> Trainer::flow_for(const std::vector<FrameWindow>& batch) const {
  if (!config_.use_flow) return std::nullopt;
  std::vector<FlowField> fields;
  fields.reserve(batch.size());
  for (const auto& w : batch) fields.push_back(compute_flow(w, *flow_));
  return flow_tensor(fields);
}

double Trainer::forward_loss(const std::vector<FrameWindow>& batch, bool with_grad) {
  TOTNET_EXPECT(!batch.empty(), "empty training batch");
  model_->train();
  const AxialScores scores = model_->forward(frames_tensor(batch), flow_for(batch));
  const torch::Tensor sx = scores.x.detach().to(torch::kDouble).contiguous();
  const torch::Tensor sy = scores.y.detach().to(torch::kDouble).contiguous();
  const int64_t b = sx.size(0), t = sx.size(1), w = sx.size(2), h = sy.size(2);
  torch::Tensor gx = torch::zeros_like(sx), gy = torch::zeros_like(sy);
  const auto frames = supervised_frames(config_, static_cast<int>(t));
  const LossWeights weights = config_.effective_weights();
  const double scale = 1.0 / (static_cast<double>(b) * static_cast<double>(frames.size()));
  double total = 0.0;
  for (int64_t i = 0; i < b; ++i) {
    for (int f : frames) {
      const double* px = sx.data_ptr<double>() + (i * t + f) * w;
      const double* py = sy.data_ptr<double>() + (i * t + f) * h;
      const BallAnnotation& ann = batch[static_cast<std::size_t>(i)].annotations[static_cast<std::size_t>(f)];
      const auto target = heatmap::build_target(ann, config_);
      const auto r = heatmap::loss_from_scores({px, px + w}, {py, py + h}, target, ann.visibility, weights,
                                               config_.activation_mode, config_.bce_epsilon);
      total += r.loss * scale;
      double* dx = gx.data_ptr<double>() + (i * t + f) * w;
      double* dy = gy.data_ptr<double>() + (i * t + f) * h;
      for (int64_t j = 0; j < w; ++j) dx[j] = r.gx[static_cast<std::size_t>(j)] * scale;
      for (int64_t j = 0; j < h; ++j) dy[j] = r.gy[static_cast<std::size_t>(j)] * scale;
    }
  }
  if (with_grad && std::isfinite(total)) {
    optimizer_->zero_grad();
    torch::autograd::backward({scores.x, scores.y}, {gx.to(scores.x.scalar_type()), gy.to(scores.y.scalar_type())});
  }
  return total;
}

StepResult Trainer::step(const std::vector<FrameWindow>& batch, double lr) {
  StepResult r;
  r.loss = forward_loss(batch, true);
  if (!std::isfinite(r.loss)) return r;
  r.grad_norm = optimizer_->clip_grad_norm(config_.optimizer.grad_clip);
  optimizer_->step(lr);
  return r;
}

double Trainer::loss(const std::vector<FrameWindow>& batch) {
  torch::NoGradGuard no_grad;
  // Batch statistics are used but running averages must not move.
  NamedTensors saved;
  for (const auto& item : model_->named_buffers()) saved.emplace_back(item.key(), item.value().clone());
  const double l = forward_loss(batch, false);
  std::size_t k = 0;
  for (const auto& item : model_->named_buffers()) item.value().copy_(saved[k++].second);
  return l;
}

ValidationResult Trainer::validate(const std::vector<WindowRef>& windows) {
  ValidationResult v;
  const LossWeights weights = config_.effective_weights();
  const std::size_t step = static_cast<std::size_t>(std::max(1, config_.optimizer.batch_size));
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < windows.size(); i += step) {
    std::vector<FrameWindow> batch;
    for (std::size_t j = i; j < std::min(windows.size(), i + step); ++j) batch.push_back(windows[j].materialize());
    const auto preds = predict(model_, config_, batch, flow_.get());
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const BallAnnotation& label = batch[b].target();
      const auto& p = preds[b][static_cast<std::size_t>(batch[b].target_index)];
      loss_sum += heatmap::weighted_bce_loss(p, heatmap::build_target(label, config_), label.visibility, weights,
                                             config_.bce_epsilon);
      v.records.push_back(eval::judge(window_id(batch[b]), heatmap::decode(p, config_.confidence_threshold), label));
    }
  }
  if (!windows.empty()) v.loss = loss_sum / static_cast<double>(windows.size());
  v.summary = eval::aggregate(v.records);
  return v;
}

double selection_metric(const ValidationResult& v) {
  const auto& vis = v.summary[Visibility::Visible];
  if (vis.count > 0 && vis.accuracy) return *vis.accuracy;
  return -v.loss;
}

TrainResult train(const PipelineConfig& config, const std::vector<ClipPtr>& train_clips,
                  const std::vector<ClipPtr>& val_clips, const TrainOptions& options) {
  config.validate();
  TrainResult result;
  WindowList built = build_windows(train_clips, config, config.train_stride);
  result.warnings = built.warnings;
  WindowList filtered = filter_training_samples(built.windows, config);
  result.warnings.insert(result.warnings.end(), filtered.warnings.begin(), filtered.warnings.end());
  std::vector<WindowRef> windows = std::move(filtered.windows);
  if (windows.empty()) throw TrainingError("no training windows after filtering");
  const std::vector<WindowRef> val_windows = build_windows(val_clips, config, config.eval_stride).windows;
  if (config.use_flow && config.flow_source == FlowSource::Oracle &&
      (config.augment.hflip_prob > 0 || config.augment.vflip_prob > 0 || config.augment.crop_prob > 0))
    result.warnings.push_back("oracle flow follows the unaugmented scene; geometric augmentation makes it inconsistent");

  std::vector<ClipPtr> all_clips = train_clips;
  all_clips.insert(all_clips.end(), val_clips.begin(), val_clips.end());
  Trainer trainer(config, make_flow_provider(config, all_clips));

  std::error_code ec;
  fs::create_directories(options.out_dir, ec);
  if (ec) throw IoError("cannot create " + options.out_dir.string() + ": " + ec.message());
  result.best_checkpoint = options.out_dir / "best.ckpt";
  result.last_checkpoint = options.out_dir / "last.ckpt";
  result.metrics_log = options.out_dir / "metrics.jsonl";

  TrainingState state;
  if (options.resume && fs::exists(result.last_checkpoint)) {
    const CheckpointData ck = load_checkpoint(result.last_checkpoint);
    restore_model(trainer.model(), ck);
    trainer.optimizer().load_state(ck.optimizer_moments, ck.optimizer_steps);
    state = ck.state;
  }
  std::ofstream log(result.metrics_log, options.resume ? std::ios::app : std::ios::trunc);
  if (!log) throw IoError("cannot write " + result.metrics_log.string());
  auto emit = [&](const nlohmann::json& rec) {
    log << rec.dump() << "\n";
    log.flush();
    if (options.on_record) options.on_record(rec);
  };

  const auto pipeline = augment::training_pipeline(config, &result.counters);
  const std::size_t batch_size = static_cast<std::size_t>(config.optimizer.batch_size);
  const std::int64_t steps_per_epoch = static_cast<std::int64_t>((windows.size() + batch_size - 1) / batch_size);
  const std::int64_t total_steps = steps_per_epoch * config.optimizer.epochs;
  std::vector<double> loss_history;

  for (int epoch = state.epoch; epoch < config.optimizer.epochs && !state.stopped_early; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    // The permutation depends only on the seed and epoch, so resumed runs see the same order.
    std::vector<std::size_t> order(windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(config.seed, 1000003ULL + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(uniform_int(shuffle_rng, 0, static_cast<int>(i) - 1))]);

    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
      std::vector<FrameWindow> batch;
      for (std::size_t j = i; j < std::min(order.size(), i + batch_size); ++j) {
        const WindowRef& ref = windows[order[j]];
        Rng rng(derive_seed(derive_seed(config.seed, static_cast<std::uint64_t>(epoch) + 1), ref.id()));
        batch.push_back(augment::compose(pipeline, ref.materialize(), rng));
      }
      const double lr = scheduled_lr(config.optimizer, state.global_step, total_steps);
      const StepResult r = trainer.step(batch, lr);
      loss_history.push_back(r.loss);
      if (!std::isfinite(r.loss)) {
        nlohmann::json diag = {{"epoch", epoch}, {"global_step", state.global_step}, {"loss_history", nlohmann::json::array()}};
        for (double l : loss_history) diag["loss_history"].push_back(std::isfinite(l) ? nlohmann::json(l) : nlohmann::json("nan"));
        for (const auto& w : batch) diag["batch_ids"].push_back(window_id(w));
        eval::write_text(options.out_dir / "failure.json", diag.dump(2) + "\n");
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                            std::to_string(state.global_step) + "; see " + (options.out_dir / "failure.json").string());
      }
      epoch_loss += r.loss * static_cast<double>(batch.size());
      seen += batch.size();
      ++state.global_step;
    }
    epoch_loss /= static_cast<double>(std::max<std::size_t>(seen, 1));
    result.epoch_losses.push_back(epoch_loss);
    const double train_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit({{"epoch", epoch + 1}, {"split", "train"}, {"loss", epoch_loss}, {"rmse", nullptr}, {"accuracy", nullptr},
          {"wall_time_s", train_secs}});

    double metric = -epoch_loss, metric_loss = epoch_loss;
    if (!val_windows.empty()) {
      const auto vstart = std::chrono::steady_clock::now();
      const ValidationResult v = trainer.validate(val_windows);
      metric = selection_metric(v);
      metric_loss = v.loss;
      emit({{"epoch", epoch + 1},
            {"split", "val"},
            {"loss", v.loss},
            {"rmse", per_visibility(v.summary, true)},
            {"accuracy", per_visibility(v.summary, false)},
            {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - vstart).count()}});
    }
    state.epoch = epoch + 1;
    // Equal accuracy is common once the Visible group saturates; the lower validation loss then wins.
    if (metric > state.best_metric || (metric == state.best_metric && metric_loss < state.best_loss)) {
      state.best_metric = metric;
      state.best_loss = metric_loss;
      state.best_epoch = epoch + 1;
      state.epochs_without_improvement = 0;
    } else {
      ++state.epochs_without_improvement;
      if (config.optimizer.patience > 0 && state.epochs_without_improvement >= config.optimizer.patience)
        state.stopped_early = true;
    }
    const CheckpointData ck = capture(trainer.model(), config, &trainer.optimizer(), state);
    if (state.best_epoch == epoch + 1) save_checkpoint(ck, result.best_checkpoint);
    save_checkpoint(ck, result.last_checkpoint);
  }
  if (!fs::exists(result.last_checkpoint))
    save_checkpoint(capture(trainer.model(), config, &trainer.optimizer(), state), result.last_checkpoint);
  if (!fs::exists(result.best_checkpoint)) fs::copy_file(result.last_checkpoint, result.best_checkpoint);
  result.state = state;
  return result;
}

}  // namespace totnet
