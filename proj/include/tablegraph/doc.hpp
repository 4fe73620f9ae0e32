#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tablegraph {

// Axis-aligned rectangle in normalized page units, y growing downwards.
struct Rect {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double area() const { return width() * height(); }
  bool well_formed() const {
    return left < right && top < bottom && left >= 0.0 && top >= 0.0 &&
           right <= 1.0 && bottom <= 1.0;
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// One word on a page. Text is absent in anonymized datasets.
struct WordBox {
  int index = 0;
  std::optional<std::string> text;
  Rect bbox;

  Point center() const {
    return {(bbox.left + bbox.right) * 0.5, (bbox.top + bbox.bottom) * 0.5};
  }
};

// A page with its word boxes. All stored bboxes are normalized to [0,1];
// width/height are the original dimensions kept for provenance.
struct Page {
  double width = 1.0;
  double height = 1.0;
  std::vector<WordBox> wordboxes;

  // Builds a page from boxes given in page units, dividing by width/height.
  static Page from_raw(double width, double height, std::vector<WordBox> raw_boxes);

  // Throws std::invalid_argument naming the offending box on any violation.
  void validate() const;
};

struct Annotation {
  int class_id = 0;
  Rect rect;
};

struct ClassSchema {
  std::vector<std::string> names;
  int body_class = 0;
  int header_class = 1;

  int class_count() const { return static_cast<int>(names.size()); }
  void validate() const;
};

// Per-box multilabel targets, row-major boxes x classes, entries in {0,1}.
struct LabelMatrix {
  int class_count = 0;
  std::vector<std::uint8_t> data;

  int box_count() const {
    return class_count == 0 ? 0 : static_cast<int>(data.size()) / class_count;
  }
  std::uint8_t& at(int box, int cls) { return data[static_cast<std::size_t>(box) * class_count + cls]; }
  std::uint8_t at(int box, int cls) const { return data[static_cast<std::size_t>(box) * class_count + cls]; }
};

// Fraction of `box`'s area covered by `rect`; 0 when disjoint.
// Throws std::invalid_argument if `box` has zero area.
double overlap_fraction(const Rect& box, const Rect& rect);

// Labels box b with class c iff some annotation of class c covers strictly
// more than 20% of b's area.
LabelMatrix generate_ground_truth(const Page& page,
                                  const std::vector<Annotation>& annotations,
                                  const ClassSchema& schema);

}  // namespace tablegraph
