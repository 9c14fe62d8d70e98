// Acceptance checks. Each criterion prints exactly one PASS/FAIL line; tolerances are fixed below.
//
//   totnet_acceptance 1 2 3      run the listed criteria
//   totnet_acceptance 6,7        desk-scale learning run and ablation (shares one set of runs)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "augment/augment.hpp"
#include "core/random.hpp"
#include "eval/evaluate.hpp"
#include "eval/metrics.hpp"
#include "heatmap/loss.hpp"
#include "heatmap/targets.hpp"
#include "model/inference.hpp"
#include "model_checks.hpp"
#include "oracles.hpp"
#include "synthetic_clips.hpp"
#include "test_support.hpp"
#include "train/checkpoint.hpp"
#include "train/trainer.hpp"

using namespace totnet;
using heatmap::AxialPrediction;
using heatmap::AxialTargets;

namespace {

// Pinned tolerances.
constexpr double kGaussianSumTol = 1e-6;
constexpr double kLossRelTol = 1e-6;
constexpr double kScoreGradRelTol = 1e-4;
constexpr double kFillTol = 1.0;  // intensity steps
constexpr int kAugCases = 1000;
constexpr double kModelGradRelTol = 1e-3;
constexpr double kMetricsTol = 1e-9;
constexpr double kVisibleAccMin = 0.85;
constexpr double kFullyOccAccMin = 0.50;
constexpr double kOverfitDrop = 0.90;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool report(int id, const std::string& name, bool pass, const std::string& detail, Clock::time_point t0) {
  std::cout << "criterion " << id << " " << (pass ? "PASS" : "FAIL") << " [" << name << "] " << detail << " ("
            << fmt(seconds_since(t0)) << " s)" << std::endl;
  return pass;
}

std::vector<double> random_scores(Rng& rng, int n, double spread) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (auto& v : s) v = uniform(rng, -spread, spread);
  return s;
}

// ---------------------------------------------------------------- 1

bool criterion_1() {
  const auto t0 = Clock::now();
  const int W = 512, H = 288;

  double worst_sum = 0.0;
  Rng rng(101);
  std::vector<double> centers = {0.0, 0.5, 1.0, 2.5, 100.0, 255.5, 286.5, 287.0};
  for (int i = 0; i < 24; ++i) centers.push_back(uniform(rng, 0.0, H - 1.0));
  for (double sigma : {0.5, 1.0, 2.0, 3.0, 5.0, 10.0})
    for (double cy : centers)
      for (double cx : {0.0, 0.5, cy, cy * 1.7, 510.5, 511.0}) {
        const AxialTargets g = heatmap::make_gaussian(cx, cy, sigma, W, H);
        worst_sum = std::max({worst_sum, std::abs(std::accumulate(g.tx.begin(), g.tx.end(), 0.0) - 1.0),
                              std::abs(std::accumulate(g.ty.begin(), g.ty.end(), 0.0) - 1.0)});
      }

  double worst_loss = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int w = uniform_int(rng, 2, W), h = uniform_int(rng, 2, H);
    const auto v = static_cast<Visibility>(uniform_int(rng, 0, 3));
    const ActivationMode mode = bernoulli(rng, 0.5) ? ActivationMode::SoftmaxAxial : ActivationMode::SigmoidAxial;
    PipelineConfig cfg;
    cfg.width = w;
    cfg.height = h;
    const BallAnnotation ann = v == Visibility::OutOfFrame
                                   ? BallAnnotation::out_of_frame(0)
                                   : BallAnnotation{0, uniform(rng, 0, w - 1.0), uniform(rng, 0, h - 1.0), v};
    const AxialTargets t = heatmap::build_target(ann, cfg);
    const LossWeights weights{{uniform(rng, 0, 1), uniform(rng, 0.1, 3), uniform(rng, 0.1, 3), uniform(rng, 0.1, 5)}};
    const AxialPrediction p = heatmap::activate(random_scores(rng, w, 8), random_scores(rng, h, 8), mode);
    const double want = test::loss_oracle(p.px, p.py, t, weights[v], cfg.bce_epsilon);
    const double got = heatmap::weighted_bce_loss(p, t, v, weights, cfg.bce_epsilon);
    const double rel = std::abs(got - want) / std::max(std::abs(want), 1e-300);
    worst_loss = std::max(worst_loss, want == 0.0 ? std::abs(got) : rel);
  }

  // Gradient of the loss with respect to the axial scores against central differences.
  double worst_grad = 0.0;
  for (ActivationMode mode : {ActivationMode::SoftmaxAxial, ActivationMode::SigmoidAxial})
    for (int i = 0; i < 20; ++i) {
      const int w = uniform_int(rng, 3, 48), h = uniform_int(rng, 3, 32);
      const auto v = static_cast<Visibility>(uniform_int(rng, 1, 3));
      PipelineConfig cfg;
      cfg.width = w;
      cfg.height = h;
      const AxialTargets t = heatmap::build_target({0, uniform(rng, 0, w - 1.0), uniform(rng, 0, h - 1.0), v}, cfg);
      const LossWeights lw;
      auto sx = random_scores(rng, w, 2), sy = random_scores(rng, h, 2);
      const auto g = heatmap::loss_from_scores(sx, sy, t, v, lw, mode, cfg.bce_epsilon);
      const double step = 1e-5;
      auto axis = [&](std::vector<double>& s, const std::vector<double>& grad) {
        for (std::size_t j = 0; j < s.size(); ++j) {
          const double keep = s[j];
          s[j] = keep + step;
          const double up = heatmap::loss_from_scores(sx, sy, t, v, lw, mode, cfg.bce_epsilon).loss;
          s[j] = keep - step;
          const double down = heatmap::loss_from_scores(sx, sy, t, v, lw, mode, cfg.bce_epsilon).loss;
          s[j] = keep;
          const double fd = (up - down) / (2 * step);
          worst_grad = std::max(worst_grad, std::abs(fd - grad[j]) / std::max(1.0, std::abs(fd)));
        }
      };
      axis(sx, g.gx);
      axis(sy, g.gy);
    }

  const bool pass = worst_sum <= kGaussianSumTol && worst_loss <= kLossRelTol && worst_grad <= kScoreGradRelTol;
  return report(1, "target/loss oracles", pass,
                "gaussian max|sum-1|=" + fmt(worst_sum) + " (tol " + fmt(kGaussianSumTol) + "), bce max rel=" +
                    fmt(worst_loss) + " (tol " + fmt(kLossRelTol) + ", 100 cases), score grad max rel=" +
                    fmt(worst_grad) + " (tol " + fmt(kScoreGradRelTol) + ")",
                t0);
}

// ---------------------------------------------------------------- 2

bool criterion_2() {
  const auto t0 = Clock::now();
  const int W = 512, H = 288;
  long checked = 0, wrong = 0;
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const AxialTargets t = heatmap::make_onehot(x, y, W, H);
      const auto d = heatmap::decode({t.tx, t.ty, ActivationMode::SoftmaxAxial}, 0.05);
      ++checked;
      if (!d || d->x != x || d->y != y) ++wrong;
    }
  return report(2, "decode of one-hot", wrong == 0,
                std::to_string(checked) + " positions, " + std::to_string(wrong) + " mismatches (tol 0)", t0);
}

// ---------------------------------------------------------------- 3

ByteImage noise_image(Rng& rng, int h, int w) {
  ByteImage img(h, w);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(uniform_int(rng, 0, 255));
  return img;
}

FrameWindow random_window(Rng& rng, int h, int w, int t) {
  FrameWindow win;
  win.target_index = t / 2;
  for (int i = 0; i < t; ++i) {
    win.frames.push_back(noise_image(rng, h, w));
    win.annotations.push_back({i, uniform(rng, 0.0, w - 1.0), uniform(rng, 0.0, h - 1.0),
                               bernoulli(rng, 0.5) ? Visibility::Visible : Visibility::PartiallyOccluded});
  }
  return win;
}

bool inside_shape(const augment::Region& r, double x, double y, double grow) {
  const double dx = x - r.cx, dy = y - r.cy, hw = r.half_w + grow, hh = r.half_h + grow;
  if (r.shape == augment::MaskShape::Rectangle) return std::abs(dx) <= hw && std::abs(dy) <= hh;
  return (dx / hw) * (dx / hw) + (dy / hh) * (dy / hh) <= 1.0;
}

bool criterion_3() {
  const auto t0 = Clock::now();
  Rng rng(2025);
  augment::OcclusionParams occ;
  double worst_fill = 0.0;
  long outside_changes = 0, map_mismatches = 0, label_mismatches = 0;

  for (int c = 0; c < kAugCases; ++c) {
    const int H = uniform_int(rng, 16, 72), W = uniform_int(rng, 16, 96);
    const FrameWindow before = random_window(rng, H, W, 5);
    const int ti = before.target_index;

    // Occlusion: fill against an independent ring mean; everything else untouched.
    augment::Region region;
    const FrameWindow after = augment::occlude_target(before, rng, occ, nullptr, &region);
    for (int f = 0; f < before.length(); ++f) {
      const auto& src = before.frames[static_cast<std::size_t>(f)];
      const auto& out = after.frames[static_cast<std::size_t>(f)];
      double sum[3] = {0, 0, 0};
      long n = 0;
      if (f == ti) {
        for (int y = 0; y < H; ++y)
          for (int x = 0; x < W; ++x)
            if (!inside_shape(region, x, y, 0) && inside_shape(region, x, y, occ.ring_margin)) {
              for (int k = 0; k < 3; ++k) sum[k] += src.at(y, x, k);
              ++n;
            }
        if (n == 0) {  // ring entirely off-image: whole-image mean
          for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
              for (int k = 0; k < 3; ++k) sum[k] += src.at(y, x, k);
          n = static_cast<long>(H) * W;
        }
      }
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          for (int k = 0; k < 3; ++k) {
            if (f == ti && inside_shape(region, x, y, 0)) {
              worst_fill = std::max(worst_fill, std::abs(out.at(y, x, k) - sum[k] / static_cast<double>(n)));
            } else if (out.at(y, x, k) != src.at(y, x, k)) {
              ++outside_changes;
            }
          }
    }
    if (after.annotations != before.annotations) ++label_mismatches;

    // Flips.
    const FrameWindow h = augment::hflip(before), v = augment::vflip(before);
    for (int f = 0; f < before.length(); ++f) {
      const auto u = static_cast<std::size_t>(f);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          for (int k = 0; k < 3; ++k) {
            if (h.frames[u].at(y, W - 1 - x, k) != before.frames[u].at(y, x, k)) ++map_mismatches;
            if (v.frames[u].at(H - 1 - y, x, k) != before.frames[u].at(y, x, k)) ++map_mismatches;
          }
      const auto& a = before.annotations[u];
      if (h.annotations[u].x != W - 1 - a.x || h.annotations[u].y != a.y) ++label_mismatches;
      if (v.annotations[u].y != H - 1 - a.y || v.annotations[u].x != a.x) ++label_mismatches;
    }

    // Nearest-neighbor crop and resize back.
    augment::CropBox box;
    box.height = uniform_int(rng, 1, H);
    box.width = uniform_int(rng, 1, W);
    box.top = uniform_int(rng, 0, H - box.height);
    box.left = uniform_int(rng, 0, W - box.width);
    const FrameWindow cropped = augment::crop_resize(before, box, Interpolation::Nearest);
    for (int f = 0; f < before.length(); ++f) {
      const auto u = static_cast<std::size_t>(f);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const double sx = box.left + x * static_cast<double>(box.width) / W;
          const double sy = box.top + y * static_cast<double>(box.height) / H;
          const int nx = std::min(box.left + box.width - 1, static_cast<int>(std::floor(sx + 0.5)));
          const int ny = std::min(box.top + box.height - 1, static_cast<int>(std::floor(sy + 0.5)));
          for (int k = 0; k < 3; ++k)
            if (cropped.frames[u].at(y, x, k) != before.frames[u].at(ny, nx, k)) ++map_mismatches;
        }
      const auto& a = before.annotations[u];
      const double ex = (a.x - box.left) * W / box.width, ey = (a.y - box.top) * H / box.height;
      const bool stays = ex >= 0 && ex < W && ey >= 0 && ey < H;
      const auto& b = cropped.annotations[u];
      if (stays ? (b.x != ex || b.y != ey || b.visibility != a.visibility) : b.visibility != Visibility::OutOfFrame)
        ++label_mismatches;
    }
  }

  const bool pass = worst_fill <= kFillTol && outside_changes == 0 && map_mismatches == 0 && label_mismatches == 0;
  return report(3, "augmentation invariants", pass,
                std::to_string(kAugCases) + " cases: max |fill-ring mean|=" + fmt(worst_fill) + " (tol " +
                    fmt(kFillTol) + "), pixels changed outside mask=" + std::to_string(outside_changes) +
                    ", flip/crop pixel mismatches=" + std::to_string(map_mismatches) +
                    ", label mismatches=" + std::to_string(label_mismatches) + " (tol 0)",
                t0);
}

// ---------------------------------------------------------------- 4

PipelineConfig grid_config(int h, int w, int t) {
  PipelineConfig c;
  c.height = h;
  c.width = w;
  c.window_length = t;
  c.target_index = t / 2;
  if (t == 3) c.model.temporal_pool = {3, 1, 1};
  return c;
}

bool criterion_4() {
  const auto t0 = Clock::now();
  std::ostringstream detail;
  bool shapes_ok = true;
  int shape_cases = 0;
  for (int t : {3, 5})
    for (auto [h, w] : {std::pair{288, 512}, std::pair{144, 256}, std::pair{64, 112}})
      for (bool flow : {false, true}) {
        PipelineConfig c = grid_config(h, w, t);
        c.use_flow = flow;
        torch::manual_seed(0);
        TotNet net = build_model(c);
        net->eval();
        const test::Batch b = test::random_batch(c, 1, 3);
        torch::NoGradGuard g;
        const AxialScores s = net->forward(b.frames, b.flow);
        ++shape_cases;
        if (s.x.sizes() != torch::IntArrayRef({1, t, w}) || s.y.sizes() != torch::IntArrayRef({1, t, h}) ||
            !torch::isfinite(s.x).all().item<bool>() || !torch::isfinite(s.y).all().item<bool>())
          shapes_ok = false;
      }

  PipelineConfig gc = grid_config(64, 112, 5);
  gc.model.channels = {4, 8, 16};
  gc.model.bottleneck_channels = 16;
  gc.model.spatial_kernels = {3, 3, 3};
  const test::GradientCheck gradient = test::gradient_check(gc, 2, 16, 77);

  torch::manual_seed(9);
  PipelineConfig pc = grid_config(64, 112, 5);
  TotNet pnet = build_model(pc);
  const double perm = test::permutation_delta(pnet, torch::rand({1, 5, 3, 64, 112}), std::nullopt);

  // Checkpoint round-trip after one optimizer step, with flow.
  PipelineConfig cc = gc;
  cc.use_flow = true;
  Trainer trainer(cc);
  const test::Batch rb = test::random_batch(cc, 1, 4);
  std::vector<FrameWindow> batch(1);
  for (int f = 0; f < cc.window_length; ++f) {
    ByteImage img(cc.height, cc.width);
    for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<std::uint8_t>((i * 37 + f * 11) % 251);
    batch[0].frames.push_back(std::move(img));
  }
  batch[0].annotations = rb.labels[0];
  batch[0].target_index = cc.target_index;
  trainer.step(batch, 1e-3);
  test::TempDir dir("acceptance_ckpt");
  TrainingState st;
  st.epoch = 1;
  const CheckpointData saved = capture(trainer.model(), cc, &trainer.optimizer(), st);
  save_checkpoint(saved, dir / "a.ckpt");
  const CheckpointData back = load_checkpoint(dir / "a.ckpt");
  bool bit_exact = back.config == cc && back.state == st && back.optimizer_steps == saved.optimizer_steps;
  auto same = [&](const NamedTensors& a, const NamedTensors& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].first != b[i].first || !torch::equal(a[i].second, b[i].second)) return false;
    return true;
  };
  bit_exact = bit_exact && same(saved.weights, back.weights) && same(saved.buffers, back.buffers) &&
              same(saved.optimizer_moments, back.optimizer_moments);
  {
    TotNet restored = model_from_checkpoint(back);
    trainer.model()->eval();
    restored->eval();
    torch::NoGradGuard g;
    bit_exact = bit_exact && torch::equal(trainer.model()->score_map(rb.frames, rb.flow),
                                          restored->score_map(rb.frames, rb.flow));
  }

  const bool pass = shapes_ok && gradient.max_rel_error < kModelGradRelTol && perm > 0.0 && bit_exact;
  detail << shape_cases << " shape cases " << (shapes_ok ? "ok" : "WRONG") << ", gradient check max rel="
         << fmt(gradient.max_rel_error) << " over " << gradient.rel_error.size() << " params (tol "
         << fmt(kModelGradRelTol) << "), permutation delta=" << fmt(perm) << " (>0), checkpoint "
         << (bit_exact ? "bit-exact" : "NOT bit-exact");
  return report(4, "model shape/gradient", pass, detail.str(), t0);
}

// ---------------------------------------------------------------- 5

bool criterion_5() {
  const auto t0 = Clock::now();
  using eval::EvalRecord;
  Rng rng(555);
  double worst = 0.0;
  long presence_mismatch = 0, count_mismatch = 0;
  const int trials = 500;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<EvalRecord> records;
    const int n = uniform_int(rng, 0, 200);
    for (int i = 0; i < n; ++i) {
      const auto v = static_cast<Visibility>(uniform_int(rng, 0, 3));
      const BallAnnotation label = v == Visibility::OutOfFrame
                                       ? BallAnnotation::out_of_frame(i)
                                       : BallAnnotation{i, uniform(rng, 0, 511), uniform(rng, 0, 287), v};
      std::optional<heatmap::Detection> pred;
      if (bernoulli(rng, 0.85)) {
        const double spread = bernoulli(rng, 0.5) ? 12.0 : 300.0;
        pred = heatmap::Detection{label.x + uniform(rng, -spread, spread), label.y + uniform(rng, -spread, spread),
                                  0.5};
      }
      records.push_back(eval::judge(std::to_string(i), pred, label));
    }
    const eval::Summary s = eval::aggregate(records);
    for (int code = -1; code < 4; ++code) {
      const eval::GroupStats& got = code < 0 ? s.overall : s[static_cast<Visibility>(code)];
      const test::GroupOracle want = test::group_oracle(records, code);
      if (got.count != want.count) ++count_mismatch;
      if (got.rmse.has_value() != want.rmse.has_value() || got.accuracy.has_value() != want.accuracy.has_value()) {
        ++presence_mismatch;
        continue;
      }
      if (want.rmse) worst = std::max(worst, std::abs(*got.rmse - *want.rmse));
      if (want.accuracy) worst = std::max(worst, std::abs(*got.accuracy - *want.accuracy));
    }
  }

  // Boundaries: 5 px for Visible/PartiallyOccluded, 10 px for FullyOccluded, inclusive.
  long boundary_wrong = 0;
  const double e5 = std::nextafter(5.0, 6.0) - 5.0, e10 = std::nextafter(10.0, 11.0) - 10.0;
  for (Visibility v : {Visibility::Visible, Visibility::PartiallyOccluded, Visibility::FullyOccluded}) {
    const double limit = v == Visibility::FullyOccluded ? 10.0 : 5.0;
    for (double d : {5.0, 5.0 + e5, 5.0 + 1e-9, 10.0, 10.0 + e10, 10.0 + 1e-9}) {
      const EvalRecord r = eval::judge("b", heatmap::Detection{d, 0.0, 1.0}, {0, 0.0, 0.0, v});
      if (!r.dist || *r.dist != d || r.correct != (d <= limit)) ++boundary_wrong;
    }
  }
  if (eval::judge("o", heatmap::Detection{1, 1, 1}, BallAnnotation::out_of_frame(0)).correct) ++boundary_wrong;
  if (!eval::judge("o", std::nullopt, BallAnnotation::out_of_frame(0)).correct) ++boundary_wrong;

  const bool pass = worst <= kMetricsTol && presence_mismatch == 0 && count_mismatch == 0 && boundary_wrong == 0;
  return report(5, "metrics oracle", pass,
                std::to_string(trials) + " record sets: max |aggregate-oracle|=" + fmt(worst) + " (tol " +
                    fmt(kMetricsTol) + "), count/presence mismatches=" +
                    std::to_string(count_mismatch + presence_mismatch) +
                    ", threshold boundary errors=" + std::to_string(boundary_wrong) + " (tol 0)",
                t0);
}

// ---------------------------------------------------------------- 6 and 7

struct Arm {
  std::string name;
  std::string ablation;
};

const std::vector<Arm> kArms = {
    {"Baseline", ""}, {"WBCE", "wbce"}, {"WBCE+Aug", "wbce,aug"}, {"WBCE+Aug+OF", "wbce,aug,of"}};
constexpr int kSeeds = 3;

/// Training plan shared by every arm: reduced channels, all-frame supervision, 3 epochs over every
/// second window. Sized for a single CPU core.
PipelineConfig desk_config() {
  PipelineConfig c;
  c.height = 144;
  c.width = 256;
  c.supervision = Supervision::AllFrames;
  c.train_stride = 2;
  c.eval_stride = 5;
  c.optimizer.epochs = 3;
  c.optimizer.batch_size = 8;
  c.optimizer.lr = 2e-3;
  c.optimizer.patience = 0;
  c.model.channels = {4, 16, 32};
  c.model.bottleneck_channels = 64;
  c.model.spatial_kernels = {3, 3, 3};
  c.flow_source = FlowSource::BlockMatching;
  return c;
}

struct RunResult {
  std::string arm;
  int seed = 0;
  eval::Summary summary;
  int best_epoch = -1;
  double seconds = 0.0;
};

RunResult run_arm(const Arm& arm, int seed, const test::SplitClips& clips) {
  const auto t0 = Clock::now();
  PipelineConfig c = desk_config();
  apply_ablation(c, arm.ablation);
  c.seed = static_cast<std::uint64_t>(seed);
  c.validate();
  test::TempDir dir("acceptance_run");
  TrainOptions opts;
  opts.out_dir = dir.path();
  const TrainResult tr = train(c, clips.train, clips.val, opts);
  const CheckpointData best = load_checkpoint(tr.best_checkpoint);
  TotNet net = model_from_checkpoint(best);
  const auto flow = make_flow_provider(c, clips.test);
  const auto records = eval::evaluate_clips(net, c, clips.test, flow.get(), c.eval_stride);
  RunResult r{arm.name, seed, eval::aggregate(records), tr.state.best_epoch, seconds_since(t0)};
  return r;
}

double value_or_nan(const std::optional<double>& v) { return v ? *v : std::nan(""); }

nlohmann::json run_json(const RunResult& r) {
  auto g = [&](Visibility v) {
    const auto& s = r.summary[v];
    return nlohmann::json{{"count", s.count}, {"rmse", value_or_nan(s.rmse)}, {"accuracy", value_or_nan(s.accuracy)}};
  };
  return {{"arm", r.arm},
          {"seed", r.seed},
          {"best_epoch", r.best_epoch},
          {"seconds", r.seconds},
          {"visible", g(Visibility::Visible)},
          {"partially_occluded", g(Visibility::PartiallyOccluded)},
          {"fully_occluded", g(Visibility::FullyOccluded)}};
}

bool criteria_6_7(bool want6, bool want7, const std::string& results_path) {
  const auto t0 = Clock::now();
  const test::SplitClips clips = test::render_benchmark(synth::BenchmarkSpec{});
  const PipelineConfig base = desk_config();
  long train_windows = 0, test_windows = 0, frames = 0, occluded = 0;
  for (const auto& c : clips.train) {
    train_windows += static_cast<long>(build_windows(c, base.window_length, base.target_index, 1).windows.size());
    for (const auto& a : c->annotations) {
      ++frames;
      if (a.visibility == Visibility::PartiallyOccluded || a.visibility == Visibility::FullyOccluded) ++occluded;
    }
  }
  for (const auto& c : clips.test)
    test_windows += static_cast<long>(build_windows(c, base.window_length, base.target_index, base.eval_stride).windows.size());
  std::cerr << "benchmark: " << train_windows << " train windows, " << test_windows << " test windows, occlusion rate "
            << fmt(static_cast<double>(occluded) / static_cast<double>(frames)) << "\n";

  std::vector<RunResult> runs;
  nlohmann::json out = {{"train_windows", train_windows},
                        {"test_windows", test_windows},
                        {"occlusion_rate", static_cast<double>(occluded) / static_cast<double>(frames)},
                        {"runs", nlohmann::json::array()}};
  auto record = [&](RunResult r) {
    std::cerr << "  " << r.arm << " seed " << r.seed << ": FullyOcc RMSE " << fmt(value_or_nan(r.summary[Visibility::FullyOccluded].rmse))
              << " acc@10 " << fmt(value_or_nan(r.summary[Visibility::FullyOccluded].accuracy)) << ", Visible acc@5 "
              << fmt(value_or_nan(r.summary[Visibility::Visible].accuracy)) << " (best epoch " << r.best_epoch << ", "
              << fmt(r.seconds) << " s)" << std::endl;
    out["runs"].push_back(run_json(r));
    if (!results_path.empty()) std::ofstream(results_path) << out.dump(2) << "\n";
    runs.push_back(std::move(r));
  };

  // The full configuration at seed 0 is criterion 6; criterion 7 adds the other arms and seeds.
  const Arm& full = kArms.back();
  record(run_arm(full, 0, clips));
  bool all_pass = true;
  if (want6) {
    const auto& s = runs.front().summary;
    const double vis = value_or_nan(s[Visibility::Visible].accuracy);
    const double occ = value_or_nan(s[Visibility::FullyOccluded].accuracy);
    const bool pass = vis >= kVisibleAccMin && occ >= kFullyOccAccMin;
    all_pass &= report(6, "desk-scale learning", pass,
                       "WBCE+Aug+OF seed 0 on " + std::to_string(test_windows) + " test windows: Visible acc@5px=" +
                           fmt(vis) + " (min " + fmt(kVisibleAccMin) + "), FullyOccluded acc@10px=" + fmt(occ) +
                           " (min " + fmt(kFullyOccAccMin) + ")",
                       t0);
  }
  if (!want7) return all_pass;

  const auto t7 = Clock::now();
  for (const Arm& arm : kArms)
    for (int seed = 0; seed < kSeeds; ++seed)
      if (!(arm.name == full.name && seed == 0)) record(run_arm(arm, seed, clips));

  std::map<std::string, std::pair<double, double>> stats;  // mean, sample sd
  std::ostringstream table;
  for (const Arm& arm : kArms) {
    std::vector<double> v;
    for (const auto& r : runs)
      if (r.arm == arm.name) v.push_back(value_or_nan(r.summary[Visibility::FullyOccluded].rmse));
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    stats[arm.name] = {mean, sd};
    table << (table.tellp() > 0 ? ", " : "") << arm.name << " " << fmt(mean) << "+-" << fmt(sd);
  }
  const auto [base_m, base_sd] = stats["Baseline"];
  const auto [aug_m, aug_sd] = stats["WBCE+Aug"];
  const auto [of_m, of_sd] = stats["WBCE+Aug+OF"];
  const double pooled = std::sqrt((aug_sd * aug_sd + of_sd * of_sd) / 2.0);
  const bool first = base_m > aug_m;
  const bool second = of_m <= aug_m + pooled;
  out["ablation"] = {{"baseline_gt_wbce_aug", first}, {"of_within_one_sd", second}, {"pooled_sd", pooled}};
  if (!results_path.empty()) std::ofstream(results_path) << out.dump(2) << "\n";
  all_pass &= report(7, "ablation ordering", first && second,
                     "mean FullyOccluded RMSE over " + std::to_string(kSeeds) + " seeds: " + table.str() +
                         "; Baseline > WBCE+Aug: " + (first ? "yes" : "no") + "; WBCE+Aug+OF <= WBCE+Aug + pooled sd (" +
                         fmt(aug_m + pooled) + "): " + (second ? "yes" : "no"),
                     t7);
  return all_pass;
}

// ---------------------------------------------------------------- 8

bool criterion_8() {
  const auto t0 = Clock::now();
  PipelineConfig c;
  c.height = 32;
  c.width = 48;
  c.model.channels = {4, 8, 8};
  c.model.bottleneck_channels = 16;
  c.model.spatial_kernels = {3, 3, 3};
  c.augment.ball_radius = 2.0;
  c.optimizer.weight_decay = 0.0;
  synth::BenchmarkSpec b;
  b.resolution = {32, 48};
  b.ball_radius = 2.0;
  b.train_clips = 1;
  b.val_clips = 0;
  b.test_clips = 0;
  b.train_clip_length = 30;
  const test::SplitClips clips = test::render_benchmark(b);
  const auto refs = build_windows(clips.train, c, 1).windows;
  std::vector<FrameWindow> batch = {refs.at(refs.size() / 2).materialize()};
  Trainer t(c);
  const double lr = 1e-2;
  const double first = t.step(batch, lr).loss;
  double last = first;
  for (int i = 1; i < 200; ++i) last = t.step(batch, lr).loss;
  const double drop = 1.0 - last / first;
  return report(8, "single-window overfit", drop >= kOverfitDrop,
                "loss " + fmt(first) + " -> " + fmt(last) + " after 200 steps, drop " + fmt(100 * drop) + "% (min " +
                    fmt(100 * kOverfitDrop) + "%)",
                t0);
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  std::string results = "acceptance_6_7.json";
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--results" && i + 1 < argc) {
      results = argv[++i];
      continue;
    }
    std::replace(a.begin(), a.end(), ',', ' ');
    std::istringstream ss(a);
    for (std::string tok; ss >> tok;) {
      if (tok == "all") {
        for (int k = 1; k <= 8; ++k) wanted.insert(k);
        continue;
      }
      try {
        const int k = std::stoi(tok);
        if (k < 1 || k > 8) throw std::out_of_range(tok);
        wanted.insert(k);
      } catch (const std::exception&) {
        std::cerr << "unknown criterion '" << tok << "' (expected 1..8 or all)\n";
        return 2;
      }
    }
  }
  if (wanted.empty()) {
    std::cerr << "usage: totnet_acceptance <criteria...> [--results path]\n";
    return 2;
  }

  bool ok = true;
  try {
    if (wanted.count(1)) ok &= criterion_1();
    if (wanted.count(2)) ok &= criterion_2();
    if (wanted.count(3)) ok &= criterion_3();
    if (wanted.count(4)) ok &= criterion_4();
    if (wanted.count(5)) ok &= criterion_5();
    if (wanted.count(6) || wanted.count(7)) ok &= criteria_6_7(wanted.count(6) > 0, wanted.count(7) > 0, results);
    if (wanted.count(8)) ok &= criterion_8();
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  return ok ? 0 : 1;
}
