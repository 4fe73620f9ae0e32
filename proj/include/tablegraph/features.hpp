#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tablegraph/doc.hpp"
#include "tablegraph/geometry.hpp"

namespace tablegraph {

// The 54-symbol alphabet: 26 letters, 10 digits, 17 specials, PAD last.
namespace alphabet {

inline constexpr int kSize = 54;
inline constexpr int kPad = 53;

// Index of a (deaccented, lowercased) code point, -1 if outside the alphabet.
int index_of(char32_t cp);
// Symbol at an index; kPad maps to U+0000.
char32_t symbol(int index);

}  // namespace alphabet

// Deaccent (strip combining marks, fold precomposed Latin letters to their
// base), lowercase, drop everything outside the alphabet. Returns UTF-8.
std::string normalize_text(std::string_view word_utf8);

// Alphabet indices of an already-normalized word.
std::vector<int> to_alphabet_indices(std::string_view normalized_utf8);

// Hand-engineered per-word features, 173 values total.
struct TextFeatureVector {
  static constexpr int kDim = 173;

  std::array<double, 53> char_counts{};   // non-PAD symbols
  std::array<double, 54> first2_counts{}; // first two chars of the PAD-filled word
  std::array<double, 54> last2_counts{};  // last two chars of the PAD-filled word
  double word_length = 0.0;
  double n_upper = 0.0;
  double n_lower = 0.0;
  double n_alpha = 0.0;
  double n_digit = 0.0;
  std::array<double, 7> number_scales{};  // clamp(v / 10^k, -1, 1), k = 0..6

  std::array<double, kDim> flatten() const;
};

TextFeatureVector extract_text_features(std::string_view word_utf8);

// First 40 characters of the normalized word as alphabet indices, PAD-filled.
// Conceptually a 40x54 one-hot matrix; stored as one index per row.
struct CharTensor {
  static constexpr int kRows = 40;
  static constexpr int kCols = alphabet::kSize;

  std::array<std::uint8_t, kRows> indices;

  CharTensor() { indices.fill(alphabet::kPad); }
  bool one_hot(int row, int col) const { return indices[row] == col; }
};

CharTensor encode_chars(std::string_view word_utf8);

// Sinusoidal embedding, 4 sin + 4 cos channels.
struct EmbeddingConfig {
  int half_dims = 4;
  double divisor = 10000.0;
};

std::array<double, 8> positional_embedding(double value, const EmbeddingConfig& cfg = {});

// Everything the network sees for one box. The numeric row is assembled on
// demand so augmentation can perturb raw values and re-embed.
struct FeatureRow {
  static constexpr int kDim = 237;  // 4*8 coord emb + 4*8 order emb + 173 text
  static constexpr double kCoordinateScale = 100.0;  // applied before embedding

  int box_index = 0;
  std::array<double, 4> bbox{};        // left, top, right, bottom (normalized)
  std::array<double, 4> order_ints{};  // line, order-in-line, rot line, rot order
  TextFeatureVector text;
  CharTensor chars;                    // carried alongside, not part of the 237

  std::array<double, kDim> assemble(const EmbeddingConfig& cfg = {}) const;
};

// One row per box, in reading-order sequence.
std::vector<FeatureRow> assemble_features(const Page& page, const ReadingOrder& order);

// Multiplicative uniform noise of the given amplitude on raw coordinates and
// text features; embeddings recomputed downstream, char tensors untouched.
std::vector<FeatureRow> augment(const std::vector<FeatureRow>& rows, std::uint64_t seed,
                                double amplitude = 0.01);

}  // namespace tablegraph
