#include "tablegraph/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace tablegraph {

EvalTargets EvalTargets::all_of(const ClassSchema& schema) {
  EvalTargets t;
  t.class_ids.resize(schema.names.size());
  std::iota(t.class_ids.begin(), t.class_ids.end(), 0);
  t.body_pos = schema.body_class;
  t.header_pos = schema.header_class;
  return t;
}

std::vector<std::uint8_t> binarize(std::span<const double> probs, double threshold) {
  std::vector<std::uint8_t> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] > threshold ? 1 : 0;
  return out;
}

double f1_score(std::int64_t tp, std::int64_t fp, std::int64_t fn, bool* undefined) {
  const std::int64_t denom = 2 * tp + fp + fn;
  if (undefined) *undefined = denom == 0;
  if (denom == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double class_averaged_f1(const ConfusionCounts& c) {
  const double positive = f1_score(c.tp, c.fp, c.fn);
  // complement-as-positive: predictions and truths both flip
  const double negative = f1_score(c.tn, c.fn, c.fp);
  return 0.5 * (positive + negative);
}

double micro_f1_positive(std::span<const ConfusionCounts> counts, bool* undefined) {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  for (const auto& c : counts) {
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
  }
  return f1_score(tp, fp, fn, undefined);
}

void accumulate_counts(std::span<const double> probs, std::span<const std::uint8_t> labels,
                       int class_count, double threshold,
                       std::vector<ConfusionCounts>& per_class) {
  if (probs.size() != labels.size() || probs.size() % class_count != 0) {
    throw std::invalid_argument("accumulate_counts: shape mismatch");
  }
  if (static_cast<int>(per_class.size()) != class_count) per_class.resize(class_count);
  const std::size_t boxes = probs.size() / class_count;
  for (std::size_t b = 0; b < boxes; ++b) {
    for (int c = 0; c < class_count; ++c) {
      const bool pred = probs[b * class_count + c] > threshold;
      const bool truth = labels[b * class_count + c] != 0;
      auto& cc = per_class[c];
      if (pred && truth) {
        ++cc.tp;
      } else if (pred && !truth) {
        ++cc.fp;
      } else if (!pred && truth) {
        ++cc.fn;
      } else {
        ++cc.tn;
      }
    }
  }
}

EvalReport report_from_counts(const std::vector<ConfusionCounts>& per_class,
                              const ClassSchema& schema, const EvalTargets& targets,
                              std::string split) {
  if (per_class.size() != targets.class_ids.size()) {
    throw std::invalid_argument("report_from_counts: count/target size mismatch");
  }
  EvalReport report;
  report.split = std::move(split);

  std::vector<ConfusionCounts> others;
  for (std::size_t pos = 0; pos < per_class.size(); ++pos) {
    PerClassScore s;
    s.name = schema.names[targets.class_ids[pos]];
    s.counts = per_class[pos];
    s.f1_positive = f1_score(s.counts.tp, s.counts.fp, s.counts.fn, &s.undefined);
    report.per_class.push_back(std::move(s));
    const bool is_body = targets.body_pos && *targets.body_pos == static_cast<int>(pos);
    const bool is_header = targets.header_pos && *targets.header_pos == static_cast<int>(pos);
    if (!is_body && !is_header) others.push_back(per_class[pos]);
  }
  if (targets.body_pos) {
    report.body_f1 = class_averaged_f1(per_class[*targets.body_pos]);
  }
  if (targets.header_pos) {
    report.header_f1 = class_averaged_f1(per_class[*targets.header_pos]);
  }
  if (!others.empty()) {
    report.others_micro_f1 = micro_f1_positive(others, &report.others_micro_undefined);
  }
  return report;
}

namespace {

std::string fmt_score(const std::optional<double>& v) {
  if (!v) return "N/A";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

}  // namespace

std::string EvalReport::to_text_table() const {
  std::string out;
  out += "split: " + split + "\n";
  out += "                      body F1   header F1   others micro F1\n";
  out += "scores                " + fmt_score(body_f1) + "    " + fmt_score(header_f1) +
         "      " + fmt_score(others_micro_f1);
  if (others_micro_undefined) out += " (undefined)";
  out += "\n\nper-class positive F1:\n";
  for (const auto& s : per_class) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %-24s %.4f%s  (tp=%lld fp=%lld fn=%lld tn=%lld)\n",
                  s.name.c_str(), s.f1_positive, s.undefined ? " (undefined)" : "",
                  static_cast<long long>(s.counts.tp), static_cast<long long>(s.counts.fp),
                  static_cast<long long>(s.counts.fn), static_cast<long long>(s.counts.tn));
    out += buf;
  }
  return out;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["split"] = split;
  j["body_f1"] = body_f1 ? nlohmann::json(*body_f1) : nlohmann::json(nullptr);
  j["header_f1"] = header_f1 ? nlohmann::json(*header_f1) : nlohmann::json(nullptr);
  j["others_micro_f1"] =
      others_micro_f1 ? nlohmann::json(*others_micro_f1) : nlohmann::json(nullptr);
  j["others_micro_undefined"] = others_micro_undefined;
  auto& pc = j["per_class"] = nlohmann::json::array();
  for (const auto& s : per_class) {
    pc.push_back({{"name", s.name},
                  {"f1_positive", s.f1_positive},
                  {"undefined", s.undefined},
                  {"tp", s.counts.tp},
                  {"fp", s.counts.fp},
                  {"fn", s.counts.fn},
                  {"tn", s.counts.tn}});
  }
  return j.dump(2);
}

}  // namespace tablegraph
