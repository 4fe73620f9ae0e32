#include "tablegraph/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "tablegraph/rng.hpp"

namespace tablegraph {

namespace {

constexpr char32_t kPound = U'£';
constexpr char32_t kEuro = U'€';

constexpr std::array<char32_t, 17> kSpecials = {
    U' ', U',', U'.', U'-', U'+', U':', U'/', U'%', U'?',
    U'$', kPound, kEuro, U'#', U'(', U')', U'&', U'\''};

// Decodes one UTF-8 code point starting at `i`; advances `i`. Malformed bytes
// decode as U+FFFD and consume one byte.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char b0 = byte(i);
  auto cont = [&](std::size_t k) {
    return k < s.size() && (byte(k) & 0xC0) == 0x80;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(i + 1)) {
    const char32_t cp = ((b0 & 0x1Fu) << 6) | (byte(i + 1) & 0x3Fu);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
    const char32_t cp =
        ((b0 & 0x0Fu) << 12) | ((byte(i + 1) & 0x3Fu) << 6) | (byte(i + 2) & 0x3Fu);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
    const char32_t cp = ((b0 & 0x07u) << 18) | ((byte(i + 1) & 0x3Fu) << 12) |
                        ((byte(i + 2) & 0x3Fu) << 6) | (byte(i + 3) & 0x3Fu);
    i += 4;
    return cp;
  }
  ++i;
  return 0xFFFD;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_combining_mark(char32_t cp) { return cp >= 0x0300 && cp <= 0x036F; }

// Folds precomposed Latin-1 / Latin Extended-A letters to their unaccented
// base, preserving case. Letters without a canonical decomposition (AE, O
// with stroke, thorn, ...) pass through unchanged and fall out of the
// alphabet later.
char32_t deaccent(char32_t cp) {
  if (cp >= 0xC0 && cp <= 0xFF) {
    if (cp >= 0xC0 && cp <= 0xC5) return U'A';
    if (cp == 0xC7) return U'C';
    if (cp >= 0xC8 && cp <= 0xCB) return U'E';
    if (cp >= 0xCC && cp <= 0xCF) return U'I';
    if (cp == 0xD1) return U'N';
    if (cp >= 0xD2 && cp <= 0xD6) return U'O';
    if (cp >= 0xD9 && cp <= 0xDC) return U'U';
    if (cp == 0xDD) return U'Y';
    if (cp >= 0xE0 && cp <= 0xE5) return U'a';
    if (cp == 0xE7) return U'c';
    if (cp >= 0xE8 && cp <= 0xEB) return U'e';
    if (cp >= 0xEC && cp <= 0xEF) return U'i';
    if (cp == 0xF1) return U'n';
    if (cp >= 0xF2 && cp <= 0xF6) return U'o';
    if (cp >= 0xF9 && cp <= 0xFC) return U'u';
    if (cp == 0xFD || cp == 0xFF) return U'y';
    return cp;
  }
  if (cp >= 0x100 && cp <= 0x17E) {
    auto even_upper = [&](char32_t lo, char32_t hi, char32_t base) -> char32_t {
      if (cp >= lo && cp <= hi) return ((cp - lo) % 2 == 0) ? base : (base + 32);
      return 0;
    };
    auto odd_upper = [&](char32_t lo, char32_t hi, char32_t base) -> char32_t {
      if (cp >= lo && cp <= hi) return ((cp - lo) % 2 == 0) ? base : (base + 32);
      return 0;
    };
    char32_t r = 0;
    if ((r = even_upper(0x100, 0x105, U'A'))) return r;
    if ((r = even_upper(0x106, 0x10D, U'C'))) return r;
    if (cp == 0x10E) return U'D';
    if (cp == 0x10F) return U'd';
    if ((r = even_upper(0x112, 0x11B, U'E'))) return r;
    if ((r = even_upper(0x11C, 0x123, U'G'))) return r;
    if (cp == 0x124) return U'H';
    if (cp == 0x125) return U'h';
    if ((r = even_upper(0x128, 0x130, U'I'))) return r;
    if (cp == 0x134) return U'J';
    if (cp == 0x135) return U'j';
    if (cp == 0x136) return U'K';
    if (cp == 0x137) return U'k';
    if ((r = odd_upper(0x139, 0x13E, U'L'))) return r;
    if ((r = odd_upper(0x143, 0x148, U'N'))) return r;
    if ((r = even_upper(0x14C, 0x151, U'O'))) return r;
    if ((r = even_upper(0x154, 0x159, U'R'))) return r;
    if ((r = even_upper(0x15A, 0x161, U'S'))) return r;
    if ((r = even_upper(0x162, 0x165, U'T'))) return r;
    if ((r = even_upper(0x168, 0x173, U'U'))) return r;
    if (cp == 0x174) return U'W';
    if (cp == 0x175) return U'w';
    if (cp == 0x176) return U'Y';
    if (cp == 0x177) return U'y';
    if (cp == 0x178) return U'Y';
    if ((r = odd_upper(0x179, 0x17E, U'Z'))) return r;
    return cp;
  }
  return cp;
}

char32_t to_lower_ascii(char32_t cp) {
  return (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp;
}

}  // namespace

namespace alphabet {

int index_of(char32_t cp) {
  if (cp >= U'a' && cp <= U'z') return static_cast<int>(cp - U'a');
  if (cp >= U'0' && cp <= U'9') return 26 + static_cast<int>(cp - U'0');
  for (int i = 0; i < static_cast<int>(kSpecials.size()); ++i) {
    if (kSpecials[i] == cp) return 36 + i;
  }
  return -1;
}

char32_t symbol(int index) {
  if (index < 0 || index >= kSize || index == kPad) return U'\0';
  if (index < 26) return U'a' + index;
  if (index < 36) return U'0' + (index - 26);
  return kSpecials[index - 36];
}

}  // namespace alphabet

std::string normalize_text(std::string_view word_utf8) {
  std::string out;
  out.reserve(word_utf8.size());
  std::size_t i = 0;
  while (i < word_utf8.size()) {
    char32_t cp = decode_utf8(word_utf8, i);
    if (is_combining_mark(cp)) continue;
    cp = to_lower_ascii(deaccent(cp));
    if (alphabet::index_of(cp) >= 0) append_utf8(out, cp);
  }
  return out;
}

std::vector<int> to_alphabet_indices(std::string_view normalized_utf8) {
  std::vector<int> out;
  out.reserve(normalized_utf8.size());
  std::size_t i = 0;
  while (i < normalized_utf8.size()) {
    const char32_t cp = decode_utf8(normalized_utf8, i);
    const int idx = alphabet::index_of(cp);
    if (idx >= 0) out.push_back(idx);
  }
  return out;
}

std::array<double, TextFeatureVector::kDim> TextFeatureVector::flatten() const {
  std::array<double, kDim> out{};
  double* p = out.data();
  p = std::copy(char_counts.begin(), char_counts.end(), p);
  p = std::copy(first2_counts.begin(), first2_counts.end(), p);
  p = std::copy(last2_counts.begin(), last2_counts.end(), p);
  *p++ = word_length;
  *p++ = n_upper;
  *p++ = n_lower;
  *p++ = n_alpha;
  *p++ = n_digit;
  std::copy(number_scales.begin(), number_scales.end(), p);
  return out;
}

namespace {

// sign? (digits (mark digits+)? | mark digits+) with mark in {., ,}; a comma
// mark must be followed by digits only, which the grammar already enforces.
bool parse_number(const std::vector<int>& idx, double* value) {
  std::string ascii;
  ascii.reserve(idx.size());
  for (int k : idx) {
    const char32_t cp = alphabet::symbol(k);
    if (cp == 0 || cp > 0x7F) return false;
    ascii.push_back(static_cast<char>(cp));
  }
  std::size_t i = 0;
  if (i < ascii.size() && (ascii[i] == '+' || ascii[i] == '-')) ++i;
  std::size_t int_digits = 0;
  while (i < ascii.size() && std::isdigit(static_cast<unsigned char>(ascii[i]))) {
    ++i;
    ++int_digits;
  }
  std::size_t frac_digits = 0;
  std::size_t mark_pos = std::string::npos;
  if (i < ascii.size() && (ascii[i] == '.' || ascii[i] == ',')) {
    mark_pos = i++;
    while (i < ascii.size() && std::isdigit(static_cast<unsigned char>(ascii[i]))) {
      ++i;
      ++frac_digits;
    }
    if (frac_digits == 0) return false;
  }
  if (i != ascii.size()) return false;
  if (int_digits == 0 && frac_digits == 0) return false;
  if (mark_pos != std::string::npos) ascii[mark_pos] = '.';
  *value = std::strtod(ascii.c_str(), nullptr);
  return true;
}

}  // namespace

TextFeatureVector extract_text_features(std::string_view word_utf8) {
  TextFeatureVector f;
  const std::string normalized = normalize_text(word_utf8);
  const std::vector<int> idx = to_alphabet_indices(normalized);

  for (int k : idx) {
    if (k != alphabet::kPad) f.char_counts[k] += 1.0;
    const char32_t cp = alphabet::symbol(k);
    if (cp >= U'a' && cp <= U'z') f.n_alpha += 1.0;
    if (cp >= U'0' && cp <= U'9') f.n_digit += 1.0;
  }
  f.word_length = static_cast<double>(idx.size());

  const auto slot = [&](std::size_t k) {
    return k < idx.size() ? idx[k] : alphabet::kPad;
  };
  f.first2_counts[slot(0)] += 1.0;
  f.first2_counts[slot(1)] += 1.0;
  if (idx.size() >= 2) {
    f.last2_counts[idx[idx.size() - 2]] += 1.0;
    f.last2_counts[idx[idx.size() - 1]] += 1.0;
  } else {
    f.last2_counts[alphabet::kPad] += 1.0;
    f.last2_counts[slot(0)] += 1.0;
  }

  // case counts come from the original, pre-lowercased text
  std::size_t i = 0;
  while (i < word_utf8.size()) {
    const char32_t cp = deaccent(decode_utf8(word_utf8, i));
    if (cp >= U'A' && cp <= U'Z') f.n_upper += 1.0;
    if (cp >= U'a' && cp <= U'z') f.n_lower += 1.0;
  }

  double value = 0.0;
  if (!idx.empty() && parse_number(idx, &value)) {
    double scale = 1.0;
    for (int k = 0; k < 7; ++k) {
      f.number_scales[k] = std::clamp(value / scale, -1.0, 1.0);
      scale *= 10.0;
    }
  }
  return f;
}

CharTensor encode_chars(std::string_view word_utf8) {
  CharTensor t;
  const std::vector<int> idx = to_alphabet_indices(normalize_text(word_utf8));
  const std::size_t n = std::min<std::size_t>(idx.size(), CharTensor::kRows);
  for (std::size_t i = 0; i < n; ++i) t.indices[i] = static_cast<std::uint8_t>(idx[i]);
  return t;
}

std::array<double, 8> positional_embedding(double value, const EmbeddingConfig& cfg) {
  std::array<double, 8> out{};
  for (int i = 0; i < cfg.half_dims; ++i) {
    const double denom = std::pow(cfg.divisor, static_cast<double>(i) / cfg.half_dims);
    out[i] = std::sin(value / denom);
    out[cfg.half_dims + i] = std::cos(value / denom);
  }
  return out;
}

std::array<double, FeatureRow::kDim> FeatureRow::assemble(const EmbeddingConfig& cfg) const {
  std::array<double, kDim> out{};
  double* p = out.data();
  for (double coord : bbox) {
    const auto emb = positional_embedding(coord * kCoordinateScale, cfg);
    p = std::copy(emb.begin(), emb.end(), p);
  }
  for (double ord : order_ints) {
    const auto emb = positional_embedding(ord, cfg);
    p = std::copy(emb.begin(), emb.end(), p);
  }
  const auto text_flat = text.flatten();
  std::copy(text_flat.begin(), text_flat.end(), p);
  return out;
}

std::vector<FeatureRow> assemble_features(const Page& page, const ReadingOrder& order) {
  std::vector<FeatureRow> rows;
  rows.reserve(page.wordboxes.size());
  for (int box : order.sequence()) {
    const WordBox& wb = page.wordboxes[box];
    const auto& e = order.entries[box];
    FeatureRow row;
    row.box_index = box;
    row.bbox = {wb.bbox.left, wb.bbox.top, wb.bbox.right, wb.bbox.bottom};
    row.order_ints = {static_cast<double>(e.line_number),
                      static_cast<double>(e.order_in_line),
                      static_cast<double>(e.rot_line_number),
                      static_cast<double>(e.rot_order_in_line)};
    if (wb.text.has_value()) {
      row.text = extract_text_features(*wb.text);
      row.chars = encode_chars(*wb.text);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<FeatureRow> augment(const std::vector<FeatureRow>& rows, std::uint64_t seed,
                                double amplitude) {
  Rng rng(seed);
  std::vector<FeatureRow> out = rows;
  for (auto& row : out) {
    for (double& coord : row.bbox) coord *= 1.0 + rng.uniform(-amplitude, amplitude);
    const auto flat = row.text.flatten();
    std::array<double, TextFeatureVector::kDim> noisy{};
    for (int i = 0; i < TextFeatureVector::kDim; ++i) {
      noisy[i] = flat[i] * (1.0 + rng.uniform(-amplitude, amplitude));
    }
    // write the perturbed values back through the named fields
    std::copy_n(noisy.begin(), 53, row.text.char_counts.begin());
    std::copy_n(noisy.begin() + 53, 54, row.text.first2_counts.begin());
    std::copy_n(noisy.begin() + 107, 54, row.text.last2_counts.begin());
    row.text.word_length = noisy[161];
    row.text.n_upper = noisy[162];
    row.text.n_lower = noisy[163];
    row.text.n_alpha = noisy[164];
    row.text.n_digit = noisy[165];
    std::copy_n(noisy.begin() + 166, 7, row.text.number_scales.begin());
  }
  return out;
}

}  // namespace tablegraph
