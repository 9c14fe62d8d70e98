#include "ingest/manifest.hpp"

#include <fstream>

#include "core/errors.hpp"

namespace totnet {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw IngestError("unknown split '" + s + "' (expected train, val, test)");
}

void write_manifest_index(const fs::path& dir, const std::vector<ClipManifest>& clips) {
  json arr = json::array();
  for (const auto& c : clips) {
    json e = {{"clip_id", c.clip_id},
              {"media", fs::relative(c.media, dir).generic_string()},
              {"annotations", fs::relative(c.annotations, dir).generic_string()},
              {"fps", c.fps},
              {"height", c.original_resolution.height},
              {"width", c.original_resolution.width},
              {"split", std::string(to_string(c.split))}};
    if (c.binary_visibility) e["label_scheme"] = "binary";
    if (!c.scene.is_null()) e["scene"] = c.scene;
    arr.push_back(std::move(e));
  }
  const json doc = {{"format_version", kManifestFormatVersion}, {"clips", arr}};
  const fs::path path = dir / kManifestFileName;
  std::ofstream f(path);
  if (!f) throw IoError("cannot write manifest " + path.string());
  f << doc.dump(1) << '\n';
  if (!f) throw IoError("failed writing manifest " + path.string());
}

std::vector<ClipManifest> read_manifest_index(const fs::path& dir_or_file) {
  const fs::path path = fs::is_directory(dir_or_file) ? dir_or_file / kManifestFileName : dir_or_file;
  const fs::path base = path.parent_path();
  std::ifstream f(path);
  if (!f) throw IoError("cannot read manifest " + path.string());
  json doc;
  try {
    doc = json::parse(f);
    if (doc.at("format_version").get<int>() != kManifestFormatVersion)
      throw IngestError("manifest " + path.string() + ": unsupported format_version");
    std::vector<ClipManifest> out;
    for (const auto& e : doc.at("clips")) {
      ClipManifest c;
      c.clip_id = e.at("clip_id").get<std::string>();
      c.media = base / e.at("media").get<std::string>();
      c.annotations = base / e.at("annotations").get<std::string>();
      c.fps = e.at("fps").get<double>();
      c.original_resolution = {e.at("height").get<int>(), e.at("width").get<int>()};
      c.split = split_from_string(e.at("split").get<std::string>());
      const std::string scheme = e.value("label_scheme", std::string("four_level"));
      if (scheme != "four_level" && scheme != "binary")
        throw IngestError("manifest " + path.string() + ": unknown label_scheme '" + scheme + "'");
      c.binary_visibility = scheme == "binary";
      if (e.contains("scene")) c.scene = e.at("scene");
      out.push_back(std::move(c));
    }
    return out;
  } catch (const json::exception& e) {
    throw IngestError("manifest " + path.string() + ": " + e.what());
  }
}

std::vector<ClipManifest> select_split(const std::vector<ClipManifest>& clips, Split split) {
  std::vector<ClipManifest> out;
  for (const auto& c : clips)
    if (c.split == split) out.push_back(c);
  return out;
}

}  // namespace totnet
