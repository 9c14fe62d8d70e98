#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace totnet {

inline constexpr const char* kAnnotationHeader = "frame,visibility,x,y";

/// One CSV row as written, before any visibility-scheme interpretation.
struct AnnotationRow {
  int frame_index = 0;
  int code = 0;
  double x = 0.0;
  double y = 0.0;
};

/// Raw rows; only the field syntax and the 0..3 code range are checked.
std::vector<AnnotationRow> parse_annotation_rows(const std::string& text, const std::string& source = "<memory>");
std::vector<AnnotationRow> read_annotation_rows(const std::filesystem::path& path);

/// Reads `frame,visibility,x,y` rows. Coordinates are returned as stored (original resolution).
/// Malformed rows raise IngestError naming the 1-based line number.
std::vector<BallAnnotation> read_annotation_csv(const std::filesystem::path& path);
std::vector<BallAnnotation> parse_annotation_csv(const std::string& text, const std::string& source = "<memory>");

void write_annotation_csv(const std::filesystem::path& path, const std::vector<BallAnnotation>& rows);
std::string format_annotation_csv(const std::vector<BallAnnotation>& rows);

/// Shortest text that parses back to exactly `v`.
std::string format_real(double v);

ByteImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ByteImage& image);
/// Bilinear resize; identity when the size already matches.
ByteImage resize_image(const ByteImage& image, Resolution target);

}  // namespace totnet
