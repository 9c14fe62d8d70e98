#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"
#include "core/random.hpp"
#include "heatmap/loss.hpp"
#include "heatmap/targets.hpp"
#include "oracles.hpp"

using namespace totnet;
using namespace totnet::heatmap;

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> random_scores(Rng& rng, int n, double spread = 2.0) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (auto& v : s) v = uniform(rng, -spread, spread);
  return s;
}

}  // namespace

TEST_CASE("axis index rounding table") {
  CHECK(axis_index(5.0, 8) == 5);
  CHECK(axis_index(5.4, 8) == 5);
  CHECK(axis_index(5.5, 8) == 6);
  CHECK(axis_index(4.5, 8) == 4);
  CHECK(axis_index(0.0, 8) == 0);
  CHECK(axis_index(7.6, 8) == 7);
  CHECK(axis_index(-0.4, 8) == 0);
}

TEST_CASE("one-hot targets") {
  const AxialTargets t = make_onehot(5, 0, 8, 4);
  CHECK(t.tx == std::vector<double>{0, 0, 0, 0, 0, 1, 0, 0});
  CHECK(t.ty == std::vector<double>{1, 0, 0, 0});
  CHECK(t.kind == TargetKind::OneHot);
  CHECK(make_onehot(5.4, 0, 8, 4).tx[5] == 1.0);
  CHECK_THROWS_AS(make_onehot(8.0, 0, 8, 4), ContractViolation);
  CHECK_THROWS_AS(make_onehot(-1.0, 0, 8, 4), ContractViolation);
}

TEST_CASE("gaussian targets") {
  const AxialTargets t = make_gaussian(10, 3, 2.0, 32, 8);
  double z = 0;
  for (int j = 0; j < 32; ++j) z += std::exp(-(j - 10.0) * (j - 10.0) / 8.0);
  CHECK(t.tx[10] == doctest::Approx(1.0 / z).epsilon(1e-12));
  CHECK(t.tx[12] / t.tx[10] == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

  const AxialTargets narrow = make_gaussian(5, 5, 0.1, 16, 16);
  for (int j = 0; j < 16; ++j) CHECK(narrow.tx[static_cast<std::size_t>(j)] == doctest::Approx(j == 5 ? 1.0 : 0.0).epsilon(1e-6));

  const AxialTargets sym = make_gaussian(7, 0, 3.0, 15, 4);
  for (int j = 0; j < 15; ++j) CHECK(sym.tx[static_cast<std::size_t>(j)] == doctest::Approx(sym.tx[static_cast<std::size_t>(14 - j)]));

  for (double sigma : {0.3, 1.0, 3.0, 10.0})
    for (double c : {0.0, 0.5, 3.2, 100.0, 510.9}) {
      const AxialTargets g = make_gaussian(c, std::min(c, 287.0), sigma, 512, 288);
      CHECK(std::abs(sum(g.tx) - 1.0) < 1e-6);
      CHECK(std::abs(sum(g.ty) - 1.0) < 1e-6);
    }
  CHECK_THROWS_AS(make_gaussian(1, 1, 0.0, 8, 8), ContractViolation);
  CHECK(sum(make_no_target(8, 4).tx) == 0.0);
  CHECK(make_no_target(8, 4).tx.size() == 8);
}

TEST_CASE("build_target dispatches on visibility") {
  PipelineConfig cfg;
  cfg.width = 16;
  cfg.height = 8;
  CHECK(build_target({0, 3, 3, Visibility::Visible}, cfg).kind == TargetKind::OneHot);
  CHECK(build_target({0, 3, 3, Visibility::PartiallyOccluded}, cfg).kind == TargetKind::OneHot);
  CHECK(build_target({0, 3, 3, Visibility::FullyOccluded}, cfg).kind == TargetKind::Gaussian);
  CHECK(build_target(BallAnnotation::out_of_frame(0), cfg).kind == TargetKind::NoTarget);
}

TEST_CASE("weighted BCE against the scalar oracle") {
  Rng rng(99);
  const double eps = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const int W = uniform_int(rng, 2, 40), H = uniform_int(rng, 2, 30);
    const auto v = static_cast<Visibility>(uniform_int(rng, 0, 3));
    const ActivationMode mode = bernoulli(rng, 0.5) ? ActivationMode::SoftmaxAxial : ActivationMode::SigmoidAxial;
    const BallAnnotation ann = v == Visibility::OutOfFrame ? BallAnnotation::out_of_frame(0)
                                                           : BallAnnotation{0, uniform(rng, 0, W - 1.0), uniform(rng, 0, H - 1.0), v};
    PipelineConfig cfg;
    cfg.width = W;
    cfg.height = H;
    const AxialTargets t = build_target(ann, cfg);
    LossWeights weights{{uniform(rng, 0, 1), uniform(rng, 0, 3), uniform(rng, 0, 3), uniform(rng, 0, 5)}};
    const AxialPrediction p = activate(random_scores(rng, W, 6), random_scores(rng, H, 6), mode);
    const double expect = test::loss_oracle(p.px, p.py, t, weights[v], eps);
    const double got = weighted_bce_loss(p, t, v, weights, eps);
    CHECK(got == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("zero weight and minimum loss") {
  const AxialTargets t = make_onehot(2, 1, 5, 3);
  LossWeights w;
  const AxialPrediction any{{0.3, 0.1, 0.2, 0.2, 0.2}, {0.1, 0.8, 0.1}, ActivationMode::SoftmaxAxial};
  CHECK(weighted_bce_loss(any, t, Visibility::OutOfFrame, w, 1e-6) == 0.0);
  const AxialPrediction perfect{t.tx, t.ty, ActivationMode::SigmoidAxial};
  const double eps = 1e-6;
  const double at_clamp = -std::log(1 - eps);
  CHECK(weighted_bce_loss(perfect, t, Visibility::PartiallyOccluded, w, eps) == doctest::Approx(2.0 * 2 * at_clamp));
  CHECK_THROWS_AS(weighted_bce_loss({{0.5}, {0.5}, ActivationMode::SigmoidAxial}, t, Visibility::Visible, w, eps),
                  ContractViolation);
}

TEST_CASE("score gradient matches central differences") {
  Rng rng(4);
  for (ActivationMode mode : {ActivationMode::SoftmaxAxial, ActivationMode::SigmoidAxial}) {
    for (int i = 0; i < 20; ++i) {
      const int W = uniform_int(rng, 3, 16), H = uniform_int(rng, 3, 12);
      const auto v = static_cast<Visibility>(uniform_int(rng, 1, 3));
      PipelineConfig cfg;
      cfg.width = W;
      cfg.height = H;
      const AxialTargets t = build_target({0, uniform(rng, 0, W - 1.0), uniform(rng, 0, H - 1.0), v}, cfg);
      const LossWeights w;
      auto sx = random_scores(rng, W), sy = random_scores(rng, H);
      const ScoreLoss g = loss_from_scores(sx, sy, t, v, w, mode, 1e-6);
      const double h = 1e-5;
      auto check_axis = [&](std::vector<double>& s, const std::vector<double>& grad) {
        for (std::size_t j = 0; j < s.size(); ++j) {
          const double keep = s[j];
          s[j] = keep + h;
          const double up = loss_from_scores(sx, sy, t, v, w, mode, 1e-6).loss;
          s[j] = keep - h;
          const double down = loss_from_scores(sx, sy, t, v, w, mode, 1e-6).loss;
          s[j] = keep;
          const double fd = (up - down) / (2 * h);
          CHECK(std::abs(fd - grad[j]) <= 1e-4 * std::max(1.0, std::abs(fd)));
        }
      };
      check_axis(sx, g.gx);
      check_axis(sy, g.gy);
    }
  }
}

TEST_CASE("batch loss") {
  const AxialTargets t = make_onehot(1, 1, 4, 4);
  const AxialPrediction p{{0.1, 0.6, 0.2, 0.1}, {0.25, 0.25, 0.25, 0.25}, ActivationMode::SoftmaxAxial};
  const LossWeights w{{0, 1, 0, 1}};
  const double single = weighted_bce_loss(p, t, Visibility::Visible, w, 1e-6);
  CHECK(batch_loss({p, p, p}, {t, t, t}, {Visibility::Visible, Visibility::Visible, Visibility::Visible}, w, 1e-6) ==
        doctest::Approx(single));
  CHECK(batch_loss({p, p}, {t, t}, {Visibility::Visible, Visibility::PartiallyOccluded}, w, 1e-6) ==
        doctest::Approx(single / 2));
  CHECK_THROWS_AS(batch_loss({}, {}, {}, w, 1e-6), ContractViolation);

  // Order of samples does not matter.
  Rng rng(12);
  std::vector<AxialPrediction> preds;
  std::vector<AxialTargets> targets;
  std::vector<Visibility> vis;
  for (int i = 0; i < 6; ++i) {
    preds.push_back(activate(random_scores(rng, 4), random_scores(rng, 4), ActivationMode::SoftmaxAxial));
    targets.push_back(make_onehot(uniform_int(rng, 0, 3), uniform_int(rng, 0, 3), 4, 4));
    vis.push_back(static_cast<Visibility>(uniform_int(rng, 1, 3)));
  }
  const double base = batch_loss(preds, targets, vis, LossWeights{}, 1e-6);
  std::reverse(preds.begin(), preds.end());
  std::reverse(targets.begin(), targets.end());
  std::reverse(vis.begin(), vis.end());
  CHECK(batch_loss(preds, targets, vis, LossWeights{}, 1e-6) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("decode") {
  AxialTargets t = make_onehot(7, 3, 16, 8);
  const auto d = decode({t.tx, t.ty, ActivationMode::SoftmaxAxial}, 0.5);
  REQUIRE(d);
  CHECK(d->x == 7);
  CHECK(d->y == 3);
  CHECK(d->confidence == 1.0);

  const std::vector<double> flat(512, 1.0 / 512);
  CHECK_FALSE(decode({flat, std::vector<double>(288, 1.0 / 288), ActivationMode::SoftmaxAxial}, 0.01));

  std::vector<double> tie(12, 0.0);
  tie[4] = tie[9] = 0.5;
  CHECK(argmax(tie) == 4);

  for (int x = 0; x < 512; x += 37)
    for (int y = 0; y < 288; y += 41) {
      const AxialTargets o = make_onehot(x, y, 512, 288);
      const auto r = decode({o.tx, o.ty, ActivationMode::SoftmaxAxial}, 0.5);
      REQUIRE(r);
      CHECK(r->x == x);
      CHECK(r->y == y);
    }
}
