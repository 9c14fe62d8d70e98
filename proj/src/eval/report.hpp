#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "eval/metrics.hpp"

namespace totnet::eval {

/// Aligned text table: one column per visibility level that has members, plus Overall;
/// rows are RMSE, Accuracy and Count.
std::string format_table(const Summary& summary);

nlohmann::json to_json(const GroupStats& g);
nlohmann::json to_json(const Summary& summary);
nlohmann::json to_json(const EvalRecord& record);

/// One JSON object per line.
std::string format_records(const std::vector<EvalRecord>& records);
void write_records(const std::filesystem::path& path, const std::vector<EvalRecord>& records);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace totnet::eval
