#include "core/types.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace totnet {

Visibility visibility_from_code(int code, int frame_index) {
  if (code < 0 || code > 3) {
    throw AnnotationError(frame_index, "visibility code " + std::to_string(code) + " outside 0..3");
  }
  return static_cast<Visibility>(code);
}

std::string_view to_string(Visibility v) noexcept {
  switch (v) {
    case Visibility::OutOfFrame: return "out_of_frame";
    case Visibility::Visible: return "visible";
    case Visibility::PartiallyOccluded: return "partially_occluded";
    case Visibility::FullyOccluded: return "fully_occluded";
  }
  return "unknown";
}

BallAnnotation validate_annotation(const BallAnnotation& ann, Resolution res) {
  if (ann.frame_index < 0) throw AnnotationError(ann.frame_index, "negative frame index");
  if (!ann.in_frame()) return ann;
  if (!std::isfinite(ann.x) || !std::isfinite(ann.y)) {
    throw AnnotationError(ann.frame_index, "non-finite coordinates");
  }
  if (ann.x < 0.0 || ann.x >= res.width || ann.y < 0.0 || ann.y >= res.height) {
    throw AnnotationError(ann.frame_index,
                          "coordinate (" + std::to_string(ann.x) + ", " + std::to_string(ann.y) +
                              ") outside " + std::to_string(res.height) + "x" +
                              std::to_string(res.width));
  }
  return ann;
}

}  // namespace totnet
