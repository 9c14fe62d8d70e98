#include <doctest.h>

#include <cstdio>

#include "core/annotation_io.hpp"
#include "core/errors.hpp"
#include "ingest/ingest.hpp"
#include "test_support.hpp"

using namespace totnet;
namespace fs = std::filesystem;

namespace {

// Writes `n` frames of size h x w plus labels into dir/clip_id and returns its manifest.
ClipManifest write_clip(const fs::path& dir, const std::string& clip_id, int n, int h, int w,
                        const std::vector<std::string>& rows, bool binary = false) {
  const fs::path clip_dir = dir / clip_id;
  fs::create_directories(clip_dir);
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06d.png", i);
    write_image(clip_dir / name, test::solid(h, w, static_cast<std::uint8_t>(i * 10), 50, 60));
  }
  std::string csv = "frame,visibility,x,y\n";
  for (const auto& r : rows) csv += r + "\n";
  std::FILE* f = std::fopen((clip_dir / "labels.csv").c_str(), "w");
  std::fputs(csv.c_str(), f);
  std::fclose(f);
  ClipManifest m;
  m.clip_id = clip_id;
  m.media = clip_dir;
  m.annotations = clip_dir / "labels.csv";
  m.original_resolution = {h, w};
  m.binary_visibility = binary;
  return m;
}

std::vector<std::string> visible_rows(int n, double x, double y) {
  std::vector<std::string> rows;
  for (int i = 0; i < n; ++i) rows.push_back(std::to_string(i) + ",1," + format_real(x) + "," + format_real(y));
  return rows;
}

ClipPtr synthetic_clip(int n, const std::vector<int>& frame_indices = {}) {
  auto c = std::make_shared<LoadedClip>();
  c->clip_id = "c";
  for (int i = 0; i < n; ++i) {
    c->frames.emplace_back(4, 4);
    const int idx = frame_indices.empty() ? i : frame_indices[static_cast<std::size_t>(i)];
    c->annotations.push_back({idx, 1.0, 1.0, Visibility::Visible});
  }
  return c;
}

}  // namespace

TEST_CASE("load_clip rescales coordinates per axis") {
  test::TempDir dir("ingest");
  PipelineConfig cfg;
  cfg.height = 18;
  cfg.width = 512;
  auto m = write_clip(dir.path(), "wide", 3, 36, 1920,
                      {"0,1,960,18", "1,3,1919,35", "2,0,-1,-1"});
  const LoadedClip clip = load_clip(m, cfg);
  REQUIRE(clip.annotations.size() == 3);
  CHECK(clip.annotations[0].x == doctest::Approx(256.0));
  CHECK(clip.annotations[0].y == doctest::Approx(9.0));
  CHECK(clip.annotations[1].visibility == Visibility::FullyOccluded);
  CHECK(clip.annotations[1].x == doctest::Approx(1919.0 * 512 / 1920));
  CHECK(clip.annotations[1].x < 512);
  CHECK(clip.annotations[2].visibility == Visibility::OutOfFrame);
  CHECK(clip.frames[0].resolution() == Resolution{18, 512});
  CHECK(clip.original_resolution == Resolution{36, 1920});
}

TEST_CASE("load_clip reports missing frames and bad rows") {
  test::TempDir dir("ingest_err");
  PipelineConfig cfg;
  cfg.height = 8;
  cfg.width = 8;
  auto m = write_clip(dir.path(), "gap", 3, 8, 8, {"0,1,1,1", "1,1,1,1", "5,1,1,1", "9,1,1,1"});
  try {
    load_clip(m, cfg);
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    const std::string what = e.what();
    CHECK(what.find("5") != std::string::npos);
    CHECK(what.find("9") != std::string::npos);
  }
  auto bad = write_clip(dir.path(), "bad", 2, 8, 8, {"0,1,1,1", "1,7,1,1"});
  try {
    load_clip(bad, cfg);
    FAIL("expected IngestError");
  } catch (const IngestError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  auto oob = write_clip(dir.path(), "oob", 1, 8, 8, {"0,1,8,1"});
  CHECK_THROWS_AS(load_clip(oob, cfg), AnnotationError);
}

TEST_CASE("binary visibility adapter") {
  CHECK(map_binary_visibility(1, true) == Visibility::Visible);
  CHECK(map_binary_visibility(0, true) == Visibility::FullyOccluded);
  CHECK(map_binary_visibility(0, false) == Visibility::OutOfFrame);

  test::TempDir dir("binary");
  PipelineConfig cfg;
  cfg.height = 8;
  cfg.width = 8;
  auto m = write_clip(dir.path(), "bin", 3, 8, 8, {"0,1,2,3", "1,0,4,5", "2,0,0,0"}, true);
  const LoadedClip clip = load_clip(m, cfg);
  CHECK(clip.annotations[0].visibility == Visibility::Visible);
  CHECK(clip.annotations[1].visibility == Visibility::FullyOccluded);
  CHECK(clip.annotations[1].x == 4.0);
  CHECK(clip.annotations[2].visibility == Visibility::OutOfFrame);
}

TEST_CASE("manifest index round-trip") {
  test::TempDir dir("manifest");
  auto a = write_clip(dir.path(), "a", 5, 8, 8, visible_rows(5, 2, 2));
  auto b = write_clip(dir.path(), "b", 5, 8, 8, visible_rows(5, 2, 2));
  b.split = Split::Test;
  b.scene = {{"k", 1}};
  write_manifest_index(dir.path(), {a, b});
  const auto read = read_manifest_index(dir.path());
  REQUIRE(read.size() == 2);
  CHECK(read[0].clip_id == "a");
  CHECK(fs::equivalent(read[0].media, a.media));
  CHECK(read[1].split == Split::Test);
  CHECK(read[1].scene["k"] == 1);
  CHECK(select_split(read, Split::Test).size() == 1);
  CHECK(select_split(read, Split::Val).empty());
  CHECK_THROWS(read_manifest_index(dir / "nowhere"));
}

TEST_CASE("window counting") {
  CHECK(build_windows(synthetic_clip(7), 5, 2, 1).windows.size() == 3);
  CHECK(build_windows(synthetic_clip(5), 5, 2, 1).windows.size() == 1);
  const WindowList short_clip = build_windows(synthetic_clip(4), 5, 2, 1);
  CHECK(short_clip.windows.empty());
  CHECK_FALSE(short_clip.warnings.empty());

  const auto w = build_windows(synthetic_clip(7), 5, 2, 1).windows;
  CHECK(w[0].start == 0);
  CHECK(w[1].start == 1);
  CHECK(w[2].start == 2);

  for (int len = 5; len <= 40; ++len)
    for (int stride = 1; stride <= 6; ++stride)
      CHECK(build_windows(synthetic_clip(len), 5, 2, stride).windows.size() ==
            static_cast<std::size_t>((len - 5) / stride + 1));
}

TEST_CASE("windows never span a frame-index gap") {
  const auto clip = synthetic_clip(10, {0, 1, 2, 3, 4, 5, 20, 21, 22, 23});
  const WindowList wl = build_windows(clip, 3, 1, 1);
  CHECK(wl.windows.size() == 4 + 2);
  for (const auto& w : wl.windows) {
    const FrameWindow fw = w.materialize();
    for (int i = 1; i < fw.length(); ++i)
      CHECK(fw.annotations[static_cast<std::size_t>(i)].frame_index ==
            fw.annotations[static_cast<std::size_t>(i - 1)].frame_index + 1);
  }
}

TEST_CASE("filter_training_samples") {
  auto c = std::make_shared<LoadedClip>();
  c->clip_id = "f";
  for (int i = 0; i < 14; ++i) {
    c->frames.emplace_back(4, 4);
    // Targets of windows (T=5, middle target) are frames 2..11; make two of them out of frame.
    const bool off = i == 4 || i == 9;
    c->annotations.push_back(off ? BallAnnotation::out_of_frame(i) : BallAnnotation{i, 1, 1, Visibility::Visible});
  }
  PipelineConfig cfg;
  const auto windows = build_windows(c, 5, 2, 1).windows;
  REQUIRE(windows.size() == 10);
  CHECK(filter_training_samples(windows, cfg).windows.size() == 8);
  cfg.exclude_out_of_frame = false;
  CHECK(filter_training_samples(windows, cfg).windows.size() == 10);

  cfg.exclude_out_of_frame = true;
  for (auto& a : c->annotations) a = BallAnnotation::out_of_frame(a.frame_index);
  const WindowList none = filter_training_samples(windows, cfg);
  CHECK(none.windows.empty());
  CHECK_FALSE(none.warnings.empty());
}

TEST_CASE("ingest is deterministic") {
  test::TempDir dir("determinism");
  PipelineConfig cfg;
  cfg.height = 8;
  cfg.width = 8;
  auto m = write_clip(dir.path(), "d", 8, 8, 8, visible_rows(8, 3.5, 2.25));
  const auto a = build_windows(std::make_shared<LoadedClip>(load_clip(m, cfg)), 5, 2, 1).windows;
  const auto b = build_windows(std::make_shared<LoadedClip>(load_clip(m, cfg)), 5, 2, 1).windows;
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const FrameWindow x = a[i].materialize(), y = b[i].materialize();
    CHECK(x.annotations == y.annotations);
    CHECK(x.frames == y.frames);
    CHECK(a[i].id() == b[i].id());
  }
}
