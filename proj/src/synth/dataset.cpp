#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "core/annotation_io.hpp"
#include "core/errors.hpp"
#include "core/random.hpp"
#include "synth/scene.hpp"

namespace totnet::synth {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json rgb_json(const Rgb& c) { return json::array({c.r, c.g, c.b}); }

Rgb rgb_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("color must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Rgb random_rgb(Rng& rng, double lo, double hi) {
  return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

long count_occluded(const SceneSpec& spec, const std::vector<Point>& traj) {
  long n = 0;
  for (int f = 0; f < spec.clip_length; ++f) {
    const Visibility v = classify_visibility(spec, traj[static_cast<std::size_t>(f)], occluders_at(spec, f));
    n += (v == Visibility::PartiallyOccluded || v == Visibility::FullyOccluded);
  }
  return n;
}

void place_occluders(SceneSpec& spec, double rate, Rng& rng) {
  const auto traj = gen_trajectory(spec);
  const double goal = rate * spec.clip_length;
  const double tol = std::max(1.0, 0.02 * spec.clip_length);
  const double sx = spec.resolution.width / 256.0, sy = spec.resolution.height / 144.0;
  const double r = spec.ball_radius;
  long count = count_occluded(spec, traj);
  for (int attempt = 0; attempt < 400 && count < goal - tol; ++attempt) {
    const int t = uniform_int(rng, 0, spec.clip_length - 1);
    const Point b = traj[static_cast<std::size_t>(t)];
    if (classify_visibility(spec, b, occluders_at(spec, t)) != Visibility::Visible) continue;
    OccluderSpec o;
    o.shape = bernoulli(rng, 0.5) ? OccluderShape::Rectangle : OccluderShape::Ellipse;
    o.half_w = uniform(rng, 1.5, 4.5) * r;
    o.half_h = uniform(rng, 1.5, 4.5) * r;
    o.vx = uniform(rng, -1.0, 1.0) * sx;
    o.vy = uniform(rng, -0.5, 0.5) * sy;
    const double dx = uniform(rng, -0.3, 0.3) * o.half_w, dy = uniform(rng, -0.3, 0.3) * o.half_h;
    o.cx = b.x + dx - o.vx * t;
    o.cy = b.y + dy - o.vy * t;
    o.color = random_rgb(rng, 0.05, 0.6);
    spec.occluders.push_back(o);
    const long next = count_occluded(spec, traj);
    if (next > goal + tol) {
      spec.occluders.pop_back();
    } else {
      count = next;
    }
  }
}

}  // namespace

json to_json(const SceneSpec& s) {
  json occ = json::array();
  for (const auto& o : s.occluders) {
    occ.push_back({{"shape", o.shape == OccluderShape::Rectangle ? "rectangle" : "ellipse"},
                   {"cx", o.cx},
                   {"cy", o.cy},
                   {"half_w", o.half_w},
                   {"half_h", o.half_h},
                   {"vx", o.vx},
                   {"vy", o.vy},
                   {"color", rgb_json(o.color)}});
  }
  const auto& p = s.physics;
  const auto& bg = s.background;
  return {{"clip_id", s.clip_id},
          {"height", s.resolution.height},
          {"width", s.resolution.width},
          {"clip_length", s.clip_length},
          {"ball_radius", s.ball_radius},
          {"ball_color", rgb_json(s.ball_color)},
          {"background",
           {{"top", rgb_json(bg.top)},
            {"bottom", rgb_json(bg.bottom)},
            {"table", rgb_json(bg.table)},
            {"texture_amplitude", bg.texture_amplitude},
            {"texture_period", bg.texture_period},
            {"texture_phase", bg.texture_phase}}},
          {"physics",
           {{"x0", p.x0},
            {"y0", p.y0},
            {"vx0", p.vx0},
            {"vy0", p.vy0},
            {"gravity", p.gravity},
            {"restitution", p.restitution},
            {"table_y", p.table_y},
            {"side_walls", p.side_walls},
            {"hit_lift", p.hit_lift}}},
          {"occluders", occ},
          {"noise_level", s.noise_level},
          {"full_cover_fraction", s.full_cover_fraction},
          {"seed", s.seed},
          {"split", std::string(to_string(s.split))},
          {"fps", s.fps}};
}

SceneSpec scene_from_json(const json& j) {
  SceneSpec s;
  try {
    read_opt(j, "clip_id", s.clip_id);
    read_opt(j, "height", s.resolution.height);
    read_opt(j, "width", s.resolution.width);
    read_opt(j, "clip_length", s.clip_length);
    read_opt(j, "ball_radius", s.ball_radius);
    if (j.contains("ball_color")) s.ball_color = rgb_from(j["ball_color"]);
    if (j.contains("background")) {
      const json& b = j["background"];
      if (b.contains("top")) s.background.top = rgb_from(b["top"]);
      if (b.contains("bottom")) s.background.bottom = rgb_from(b["bottom"]);
      if (b.contains("table")) s.background.table = rgb_from(b["table"]);
      read_opt(b, "texture_amplitude", s.background.texture_amplitude);
      read_opt(b, "texture_period", s.background.texture_period);
      read_opt(b, "texture_phase", s.background.texture_phase);
    }
    if (j.contains("physics")) {
      const json& p = j["physics"];
      read_opt(p, "x0", s.physics.x0);
      read_opt(p, "y0", s.physics.y0);
      read_opt(p, "vx0", s.physics.vx0);
      read_opt(p, "vy0", s.physics.vy0);
      read_opt(p, "gravity", s.physics.gravity);
      read_opt(p, "restitution", s.physics.restitution);
      read_opt(p, "table_y", s.physics.table_y);
      read_opt(p, "side_walls", s.physics.side_walls);
      read_opt(p, "hit_lift", s.physics.hit_lift);
    }
    if (j.contains("occluders")) {
      for (const auto& e : j["occluders"]) {
        OccluderSpec o;
        const std::string shape = e.value("shape", std::string("rectangle"));
        if (shape != "rectangle" && shape != "ellipse") throw ValidationError("unknown occluder shape " + shape);
        o.shape = shape == "rectangle" ? OccluderShape::Rectangle : OccluderShape::Ellipse;
        read_opt(e, "cx", o.cx);
        read_opt(e, "cy", o.cy);
        read_opt(e, "half_w", o.half_w);
        read_opt(e, "half_h", o.half_h);
        read_opt(e, "vx", o.vx);
        read_opt(e, "vy", o.vy);
        if (e.contains("color")) o.color = rgb_from(e["color"]);
        s.occluders.push_back(o);
      }
    }
    read_opt(j, "noise_level", s.noise_level);
    read_opt(j, "full_cover_fraction", s.full_cover_fraction);
    read_opt(j, "seed", s.seed);
    if (j.contains("split")) s.split = split_from_string(j["split"].get<std::string>());
    read_opt(j, "fps", s.fps);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scene spec: ") + e.what());
  }
  return s;
}

json to_json(const BenchmarkSpec& b) {
  return {{"height", b.resolution.height},
          {"width", b.resolution.width},
          {"train_clips", b.train_clips},
          {"val_clips", b.val_clips},
          {"test_clips", b.test_clips},
          {"train_clip_length", b.train_clip_length},
          {"eval_clip_length", b.eval_clip_length},
          {"ball_radius", b.ball_radius},
          {"occlusion_rate", b.occlusion_rate},
          {"noise_level", b.noise_level},
          {"full_cover_fraction", b.full_cover_fraction},
          {"seed", b.seed}};
}

BenchmarkSpec benchmark_from_json(const json& j) {
  BenchmarkSpec b;
  const json known = to_json(b);
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.contains(it.key())) throw ConfigError(it.key(), "unknown benchmark key");
  try {
    read_opt(j, "height", b.resolution.height);
    read_opt(j, "width", b.resolution.width);
    read_opt(j, "train_clips", b.train_clips);
    read_opt(j, "val_clips", b.val_clips);
    read_opt(j, "test_clips", b.test_clips);
    read_opt(j, "train_clip_length", b.train_clip_length);
    read_opt(j, "eval_clip_length", b.eval_clip_length);
    read_opt(j, "ball_radius", b.ball_radius);
    read_opt(j, "occlusion_rate", b.occlusion_rate);
    read_opt(j, "noise_level", b.noise_level);
    read_opt(j, "full_cover_fraction", b.full_cover_fraction);
    read_opt(j, "seed", b.seed);
  } catch (const json::exception& e) {
    throw ConfigError("<benchmark>", e.what());
  }
  if (b.train_clips < 0 || b.val_clips < 0 || b.test_clips < 0) throw ValidationError("clip counts must be >= 0");
  if (!(b.occlusion_rate >= 0.0 && b.occlusion_rate < 1.0)) throw ValidationError("occlusion_rate must lie in [0, 1)");
  return b;
}

std::vector<SceneSpec> benchmark_family(const BenchmarkSpec& b) {
  std::vector<SceneSpec> out;
  const double sx = b.resolution.width / 256.0, sy = b.resolution.height / 144.0;
  const double H = b.resolution.height, W = b.resolution.width;
  int index = 0;
  auto make = [&](Split split, int n, int length) {
    for (int k = 0; k < n; ++k, ++index) {
      Rng rng(derive_seed(b.seed, static_cast<std::uint64_t>(index)));
      SceneSpec s;
      char id[32];
      std::snprintf(id, sizeof id, "%s_%03d", std::string(to_string(split)).c_str(), k);
      s.clip_id = id;
      s.split = split;
      s.resolution = b.resolution;
      s.clip_length = length;
      s.ball_radius = b.ball_radius;
      s.noise_level = b.noise_level;
      s.full_cover_fraction = b.full_cover_fraction;
      s.seed = rng();
      s.ball_color = {uniform(rng, 0.9, 1.0), uniform(rng, 0.75, 0.95), uniform(rng, 0.2, 0.45)};
      s.background.top = random_rgb(rng, 0.05, 0.45);
      s.background.bottom = random_rgb(rng, 0.05, 0.45);
      s.background.table = {uniform(rng, 0.05, 0.2), uniform(rng, 0.15, 0.35), uniform(rng, 0.3, 0.5)};
      s.background.texture_amplitude = uniform(rng, 0.02, 0.06);
      s.background.texture_period = uniform(rng, 15.0, 40.0);
      s.background.texture_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      auto& p = s.physics;
      p.table_y = uniform(rng, 0.72, 0.88) * H;
      p.x0 = uniform(rng, 0.15, 0.85) * W;
      p.y0 = uniform(rng, 0.25, 0.55) * H;
      p.vx0 = (bernoulli(rng, 0.5) ? 1.0 : -1.0) * uniform(rng, 2.5, 5.0) * sx;
      p.vy0 = uniform(rng, -3.0, 1.0) * sy;
      p.gravity = uniform(rng, 0.25, 0.4) * sy;
      p.restitution = uniform(rng, 0.75, 0.92);
      p.side_walls = true;
      p.hit_lift = uniform(rng, 3.5, 5.5) * sy;
      if (b.occlusion_rate > 0.0) place_occluders(s, b.occlusion_rate, rng);
      out.push_back(std::move(s));
    }
  };
  make(Split::Train, b.train_clips, b.train_clip_length);
  make(Split::Val, b.val_clips, b.eval_clip_length);
  make(Split::Test, b.test_clips, b.eval_clip_length);
  return out;
}

DatasetReport gen_dataset(const std::vector<SceneSpec>& specs, const fs::path& out_dir) {
  DatasetReport report;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());
  for (const auto& spec : specs) {
    spec.validate();
    const fs::path clip_dir = out_dir / spec.clip_id;
    fs::create_directories(clip_dir, ec);
    if (ec) throw IoError("cannot create clip directory " + clip_dir.string() + ": " + ec.message());
    const ClipLabels labels = label_clip(spec);
    for (int f = 0; f < spec.clip_length; ++f) {
      const auto rendered =
          render_frame(spec, labels.trajectory[static_cast<std::size_t>(f)], occluders_at(spec, f), f);
      char name[32];
      std::snprintf(name, sizeof name, "%06d.png", f);
      write_image(clip_dir / name, rendered.image);
    }
    for (const auto& a : labels.annotations) ++report.histogram[static_cast<std::size_t>(to_code(a.visibility))];
    report.frames += spec.clip_length;
    write_annotation_csv(clip_dir / "labels.csv", labels.annotations);
    ClipManifest m;
    m.clip_id = spec.clip_id;
    m.media = clip_dir;
    m.annotations = clip_dir / "labels.csv";
    m.fps = spec.fps;
    m.original_resolution = spec.resolution;
    m.split = spec.split;
    m.scene = to_json(spec);
    report.manifests.push_back(std::move(m));
  }
  write_manifest_index(out_dir, report.manifests);
  return report;
}

}  // namespace totnet::synth
