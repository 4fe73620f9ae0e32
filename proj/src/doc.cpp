#include "tablegraph/doc.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace tablegraph {

Page Page::from_raw(double width, double height, std::vector<WordBox> raw_boxes) {
  if (width <= 0.0 || height <= 0.0) {
    throw std::invalid_argument("page dimensions must be positive, got " +
                                std::to_string(width) + " x " + std::to_string(height));
  }
  Page page;
  page.width = width;
  page.height = height;
  page.wordboxes = std::move(raw_boxes);
  for (auto& box : page.wordboxes) {
    box.bbox.left /= width;
    box.bbox.right /= width;
    box.bbox.top /= height;
    box.bbox.bottom /= height;
  }
  page.validate();
  return page;
}

void Page::validate() const {
  std::set<int> seen;
  for (const auto& box : wordboxes) {
    const Rect& r = box.bbox;
    if (!(r.left < r.right) || !(r.top < r.bottom)) {
      throw std::invalid_argument("wordbox " + std::to_string(box.index) +
                                  ": zero-area or inverted bbox");
    }
    if (r.left < 0.0 || r.top < 0.0 || r.right > 1.0 || r.bottom > 1.0) {
      throw std::invalid_argument("wordbox " + std::to_string(box.index) +
                                  ": coordinates outside [0,1]");
    }
    if (!seen.insert(box.index).second) {
      throw std::invalid_argument("duplicate wordbox index " + std::to_string(box.index));
    }
  }
}

void ClassSchema::validate() const {
  if (names.size() < 2) {
    throw std::invalid_argument("class schema needs at least 2 classes");
  }
  std::set<std::string> unique(names.begin(), names.end());
  if (unique.size() != names.size()) {
    throw std::invalid_argument("class names must be unique");
  }
  if (body_class == header_class) {
    throw std::invalid_argument("body_class and header_class must differ");
  }
  auto in_range = [&](int c) { return c >= 0 && c < class_count(); };
  if (!in_range(body_class) || !in_range(header_class)) {
    throw std::invalid_argument("body/header class index out of range");
  }
}

double overlap_fraction(const Rect& box, const Rect& rect) {
  const double box_area = box.area();
  if (!(box_area > 0.0)) {
    throw std::invalid_argument("overlap_fraction: zero-area box");
  }
  const double w = std::min(box.right, rect.right) - std::max(box.left, rect.left);
  const double h = std::min(box.bottom, rect.bottom) - std::max(box.top, rect.top);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return (w * h) / box_area;
}

LabelMatrix generate_ground_truth(const Page& page,
                                  const std::vector<Annotation>& annotations,
                                  const ClassSchema& schema) {
  schema.validate();
  for (const auto& ann : annotations) {
    if (ann.class_id < 0 || ann.class_id >= schema.class_count()) {
      throw std::invalid_argument("annotation references unknown class " +
                                  std::to_string(ann.class_id));
    }
  }
  LabelMatrix labels;
  labels.class_count = schema.class_count();
  labels.data.assign(page.wordboxes.size() * schema.class_count(), 0);
  for (std::size_t b = 0; b < page.wordboxes.size(); ++b) {
    for (const auto& ann : annotations) {
      // strict ">": boxes covered exactly 20% stay unlabeled
      if (overlap_fraction(page.wordboxes[b].bbox, ann.rect) > 0.20) {
        labels.at(static_cast<int>(b), ann.class_id) = 1;
      }
    }
  }
  return labels;
}

}  // namespace tablegraph
