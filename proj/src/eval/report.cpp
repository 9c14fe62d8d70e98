#include "eval/report.hpp"

#include <cstdio>
#include <fstream>

#include "core/errors.hpp"

namespace totnet::eval {

namespace {

std::string column_name(Visibility v) {
  switch (v) {
    case Visibility::OutOfFrame: return "OutOfFrame";
    case Visibility::Visible: return "Visible";
    case Visibility::PartiallyOccluded: return "Partial";
    case Visibility::FullyOccluded: return "FullyOcc";
  }
  return "?";
}

std::string cell(const std::optional<double>& v, const char* fmt) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

std::string format_table(const Summary& summary) {
  std::vector<std::pair<std::string, const GroupStats*>> cols;
  for (Visibility v : kAllVisibilities)
    if (summary[v].count > 0) cols.emplace_back(column_name(v), &summary[v]);
  cols.emplace_back("Overall", &summary.overall);

  constexpr std::size_t label_w = 10, col_w = 12;
  std::string out = std::string(label_w, ' ');
  for (const auto& [name, _] : cols) out += pad(name, col_w);
  out += "\n";
  auto row = [&](const std::string& label, auto&& fn) {
    out += label + std::string(label_w - label.size(), ' ');
    for (const auto& c : cols) out += pad(fn(*c.second), col_w);
    out += "\n";
  };
  row("RMSE", [](const GroupStats& g) { return cell(g.rmse, "%.3f"); });
  row("Accuracy", [](const GroupStats& g) { return cell(g.accuracy, "%.3f"); });
  row("Count", [](const GroupStats& g) { return std::to_string(g.count); });
  return out;
}

nlohmann::json to_json(const GroupStats& g) {
  return {{"count", g.count}, {"rmse", opt(g.rmse)}, {"accuracy", opt(g.accuracy)}, {"mean_dist", opt(g.mean_dist)}};
}

nlohmann::json to_json(const Summary& summary) {
  nlohmann::json j;
  for (Visibility v : kAllVisibilities)
    if (summary[v].count > 0) j["by_visibility"][std::string(to_string(v))] = to_json(summary[v]);
  j["overall"] = to_json(summary.overall);
  return j;
}

nlohmann::json to_json(const EvalRecord& r) {
  nlohmann::json j = {{"sample_id", r.sample_id},
                      {"visibility", to_code(r.visibility)},
                      {"dist", opt(r.dist)},
                      {"no_ball", r.no_ball},
                      {"correct", r.correct},
                      {"label_x", r.label.x},
                      {"label_y", r.label.y}};
  if (r.prediction) {
    j["pred_x"] = r.prediction->x;
    j["pred_y"] = r.prediction->y;
    j["confidence"] = r.prediction->confidence;
  }
  return j;
}

std::string format_records(const std::vector<EvalRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

void write_records(const std::filesystem::path& path, const std::vector<EvalRecord>& records) {
  write_text(path, format_records(records));
}

}  // namespace totnet::eval
