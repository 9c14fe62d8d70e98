#include "core/annotation_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "core/errors.hpp"

namespace totnet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& field, T& out) {
  const std::string f = trim(field);
  if (f.empty()) return false;
  const char* end = f.data() + f.size();
  auto [ptr, ec] = std::from_chars(f.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<AnnotationRow> parse_annotation_rows(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<AnnotationRow> rows;
  auto fail = [&](const std::string& why) -> IngestError {
    return IngestError(source + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != kAnnotationHeader) throw fail("expected header '" + std::string(kAnnotationHeader) + "'");
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    if (fields.size() != 4) throw fail("expected 4 fields, got " + std::to_string(fields.size()));
    AnnotationRow r;
    if (!parse_number(fields[0], r.frame_index) || r.frame_index < 0) throw fail("bad frame index");
    if (!parse_number(fields[1], r.code)) throw fail("bad visibility code");
    if (r.code < 0 || r.code > 3) throw fail("visibility code " + std::to_string(r.code) + " outside 0..3");
    if (!parse_number(fields[2], r.x) || !parse_number(fields[3], r.y)) throw fail("bad coordinate");
    rows.push_back(r);
  }
  if (line_no == 0) throw IngestError(source + ": empty annotation file");
  return rows;
}

std::vector<BallAnnotation> parse_annotation_csv(const std::string& text, const std::string& source) {
  std::vector<BallAnnotation> out;
  for (const auto& r : parse_annotation_rows(text, source)) {
    const auto v = static_cast<Visibility>(r.code);
    out.push_back(v == Visibility::OutOfFrame ? BallAnnotation::out_of_frame(r.frame_index)
                                              : BallAnnotation{r.frame_index, r.x, r.y, v});
  }
  return out;
}

namespace {
std::string slurp(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read annotation file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}
}  // namespace

std::vector<AnnotationRow> read_annotation_rows(const std::filesystem::path& path) {
  return parse_annotation_rows(slurp(path), path.string());
}

std::vector<BallAnnotation> read_annotation_csv(const std::filesystem::path& path) {
  return parse_annotation_csv(slurp(path), path.string());
}

std::string format_annotation_csv(const std::vector<BallAnnotation>& rows) {
  std::string out = std::string(kAnnotationHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.frame_index) + "," + std::to_string(to_code(r.visibility)) + ",";
    if (r.in_frame()) {
      out += format_real(r.x) + "," + format_real(r.y) + "\n";
    } else {
      out += "-1,-1\n";
    }
  }
  return out;
}

void write_annotation_csv(const std::filesystem::path& path, const std::vector<BallAnnotation>& rows) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write annotation file " + path.string());
  f << format_annotation_csv(rows);
  if (!f) throw IoError("failed writing annotation file " + path.string());
}

ByteImage read_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot decode image " + path.string());
  ByteImage img(bgr.rows, bgr.cols);
  cv::Mat rgb(bgr.rows, bgr.cols, CV_8UC3, img.data.data());
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return img;
}

void write_image(const std::filesystem::path& path, const ByteImage& image) {
  cv::Mat rgb(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.data.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw IoError("cannot write image " + path.string());
}

ByteImage resize_image(const ByteImage& image, Resolution target) {
  if (image.resolution() == target) return image;
  cv::Mat src(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.data.data()));
  ByteImage out(target.height, target.width);
  cv::Mat dst(target.height, target.width, CV_8UC3, out.data.data());
  cv::resize(src, dst, cv::Size(target.width, target.height), 0, 0, cv::INTER_LINEAR);
  return out;
}

}  // namespace totnet
