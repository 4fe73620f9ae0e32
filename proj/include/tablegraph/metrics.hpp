#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tablegraph/doc.hpp"

namespace tablegraph {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
};

// Which classes of the full schema are scored, and where body/header sit
// within the active list (absent when excluded by a --targets selection).
struct EvalTargets {
  std::vector<int> class_ids;  // indices into the full schema, ascending
  std::optional<int> body_pos;
  std::optional<int> header_pos;

  static EvalTargets all_of(const ClassSchema& schema);
  int class_count() const { return static_cast<int>(class_ids.size()); }
};

struct PerClassScore {
  std::string name;
  double f1_positive = 0.0;
  bool undefined = false;  // zero-denominator F1, reported as 0
  ConfusionCounts counts;
};

struct EvalReport {
  std::string split;  // "adaptation" | "generalization" | ...
  std::optional<double> body_f1;
  std::optional<double> header_f1;
  std::optional<double> others_micro_f1;
  bool others_micro_undefined = false;
  std::vector<PerClassScore> per_class;

  std::string to_text_table() const;
  std::string to_json() const;
};

// probability > threshold, strict.
std::vector<std::uint8_t> binarize(std::span<const double> probs, double threshold = 0.5);

// F1 with the zero-denominator convention: 2tp+fp+fn == 0 -> 0, flagged.
double f1_score(std::int64_t tp, std::int64_t fp, std::int64_t fn,
                bool* undefined = nullptr);

// Mean of F1 treating the class as positive and F1 treating its complement as
// positive; a zero-denominator side contributes 0.
double class_averaged_f1(const ConfusionCounts& counts);

// F1 from tp/fp/fn pooled across the given classes; negatives never pooled.
double micro_f1_positive(std::span<const ConfusionCounts> counts, bool* undefined = nullptr);

// Accumulates per-class confusion counts for one document's predictions.
// probs is row-major boxes x class_count (active classes), labels likewise.
void accumulate_counts(std::span<const double> probs, std::span<const std::uint8_t> labels,
                       int class_count, double threshold,
                       std::vector<ConfusionCounts>& per_class);

// Builds the report from pooled counts.
EvalReport report_from_counts(const std::vector<ConfusionCounts>& per_class,
                              const ClassSchema& schema, const EvalTargets& targets,
                              std::string split);

}  // namespace tablegraph
