#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tablegraph/doc.hpp"

namespace tablegraph {

inline constexpr const char* kDatasetHeader = "#tablegraph-dataset v1";

struct PageData {
  Page page;
  std::vector<Annotation> annotations;
  // Opaque precomputed text-feature vectors, one per box, possibly empty.
  std::vector<std::vector<double>> precomputed_features;
};

struct DatasetRecord {
  std::string id;
  std::string layout_family = "unknown";
  std::vector<PageData> pages;
};

struct SplitSpec {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> generalization;
};

struct SynthConfig {
  int documents = 200;
  int families = 5;
  std::uint64_t seed = 1;

  // per-family parameter ranges
  int min_rows = 4;
  int max_rows = 9;
  int min_cols = 3;
  int max_cols = 6;
  double header_probability = 0.85;
  int max_distractors = 3;
  int min_noise_words = 110;
  int max_noise_words = 170;
  double column_jitter = 0.004;

  void validate() const;
};

// Dataset lines are JSON records; line 1 is the format header and '#'-prefixed
// metadata lines may follow it (the generator writes the class schema there).
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path,
                                        std::optional<ClassSchema>* schema_out = nullptr);
void save_dataset(const std::vector<DatasetRecord>& records,
                  const std::filesystem::path& path,
                  const ClassSchema* schema = nullptr);

// Holds out whole layout families (~10%) for the generalization split, then
// splits the remaining documents 3:1 into train and validation.
SplitSpec make_splits(const std::vector<DatasetRecord>& records, std::uint64_t seed);

// The 4-class schema produced by the generator.
ClassSchema synth_schema();

std::vector<DatasetRecord> synth_generate(const SynthConfig& cfg);

// Fraction of positive entries over all box x class entries.
double positive_rate(const std::vector<DatasetRecord>& records, const ClassSchema& schema);

}  // namespace tablegraph
