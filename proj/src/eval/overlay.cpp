#include "eval/overlay.hpp"

#include <cstdio>

#include <opencv2/imgproc.hpp>

#include "core/annotation_io.hpp"
#include "core/errors.hpp"

namespace totnet::eval {

ByteImage render_overlay(const ByteImage& frame, const std::optional<heatmap::Detection>& prediction,
                         const std::optional<BallAnnotation>& label) {
  ByteImage out = frame;
  cv::Mat img(out.height, out.width, CV_8UC3, out.data.data());
  const cv::Scalar pred_color(255, 64, 64), label_color(64, 255, 64), text_color(255, 255, 0);
  const double font = std::max(0.3, out.height / 600.0);
  if (label && label->in_frame()) {
    const cv::Point c(static_cast<int>(std::lround(label->x)), static_cast<int>(std::lround(label->y)));
    cv::drawMarker(img, c, label_color, cv::MARKER_CROSS, 10, 1);
  }
  if (prediction) {
    const cv::Point c(static_cast<int>(std::lround(prediction->x)), static_cast<int>(std::lround(prediction->y)));
    cv::circle(img, c, 6, pred_color, 1, cv::LINE_AA);
  } else {
    cv::putText(img, "no ball", cv::Point(4, out.height - 6), cv::FONT_HERSHEY_SIMPLEX, font, pred_color, 1);
  }
  if (label) {
    cv::putText(img, "vis " + std::to_string(to_code(label->visibility)), cv::Point(4, 14), cv::FONT_HERSHEY_SIMPLEX,
                font, text_color, 1);
  }
  return out;
}

std::size_t render_overlays(const std::vector<ByteImage>& frames,
                            const std::vector<std::optional<heatmap::Detection>>& predictions,
                            const std::vector<std::optional<BallAnnotation>>& labels,
                            const std::filesystem::path& out_dir) {
  TOTNET_EXPECT(predictions.size() == frames.size(), "one prediction per frame required");
  TOTNET_EXPECT(labels.empty() || labels.size() == frames.size(), "labels must align with frames");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.png", i);
    write_image(out_dir / name, render_overlay(frames[i], predictions[i], labels.empty() ? std::nullopt : labels[i]));
  }
  return frames.size();
}

}  // namespace totnet::eval
