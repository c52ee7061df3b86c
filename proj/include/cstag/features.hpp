#pragma once

// Feature templates for the first-order tagger. Character-level templates
// (affixes, padded character n-grams, word shape) carry most of the signal
// on noisy, romanized code-switched text.

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cstag/corpus.hpp"

namespace cstag {

enum class TaggerMode {
  Plain,
  LangInput,   ///< the token's language tag is an input feature
  LangOutput,  ///< labels are (task label, language tag) pairs
};

std::string_view to_string(TaggerMode mode);
TaggerMode parse_mode(std::string_view text);

enum class FeatureTemplate : std::uint8_t {
  Word,
  Shape,
  Prefix,
  Suffix,
  CharNgram,
  PrevWord,
  NextWord,
  LangTag,
  PrevLabel,
};
inline constexpr std::size_t kTemplateCount = 9;

using TemplateSet = std::bitset<kTemplateCount>;
inline TemplateSet all_templates() { return TemplateSet{}.set(); }

std::string_view template_name(FeatureTemplate t);
FeatureTemplate parse_template(std::string_view name);

inline constexpr std::string_view kBos = "<BOS>";
inline constexpr std::string_view kEos = "<EOS>";
/// Previous-label value at the first position.
inline constexpr std::string_view kStartLabel = "<S>";
/// Separates template name and payload in encoded keys; never occurs in a
/// payload because surfaces, labels and language tags exclude whitespace.
inline constexpr char kKeySeparator = '\t';

struct FeatureKey {
  FeatureTemplate tmpl = FeatureTemplate::Word;
  std::string payload;

  std::string encoded() const;
  static FeatureKey decode(std::string_view encoded);

  friend bool operator==(const FeatureKey&, const FeatureKey&) = default;
};

/// ASCII lowercasing; other bytes are left alone.
std::string lowercase(std::string_view word);
/// Upper -> X, lower -> x, digit -> d, other ASCII kept, non-ASCII -> x.
std::string word_shape(std::string_view word);
/// Splits UTF-8 into code points; stray bytes become single-byte units.
std::vector<std::string_view> utf8_chars(std::string_view text);

/// All features of `position` given the previous label (kStartLabel at 0).
std::vector<FeatureKey> extract_features(const Sentence& sentence, std::size_t position,
                                         std::string_view prev_label, TaggerMode mode,
                                         const TemplateSet& templates = all_templates());

/// Encoded emission features (everything except PrevLabel) appended to `out`.
void append_emission_features(const Sentence& sentence, std::size_t position, TaggerMode mode,
                              const TemplateSet& templates, std::vector<std::string>& out);

}  // namespace cstag
