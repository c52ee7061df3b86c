#pragma once

// Switch-point detection and the directional ratio statistic s = a / b, where
// a counts Matrix->Embedded switches and b counts Embedded->Matrix switches.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "cstag/corpus.hpp"

namespace cstag {

enum class SwitchDirection { EnToX, XToEn };

inline SwitchDirection opposite(SwitchDirection d) {
  return d == SwitchDirection::EnToX ? SwitchDirection::XToEn : SwitchDirection::EnToX;
}

/// "en2x" / "x2en".
std::string_view to_string(SwitchDirection d);
SwitchDirection parse_direction(std::string_view text);

struct SwitchPoint {
  std::size_t token_index = 0;  ///< first token of the new language run
  SwitchDirection direction = SwitchDirection::EnToX;

  friend bool operator==(const SwitchPoint&, const SwitchPoint&) = default;
};

struct SwitchOptions {
  /// Treat a Neutral token as a break: the language before it is forgotten,
  /// so no switch is counted across it. Off by default (Neutral is skipped).
  bool neutral_breaks = false;
};

/// Extended non-negative rational a/b.
enum class RatioKind { Finite, Infinite, Undefined };

struct SwitchStats {
  std::size_t a = 0;  ///< EnToX count
  std::size_t b = 0;  ///< XToEn count

  RatioKind ratio_kind() const {
    if (b > 0) return RatioKind::Finite;
    return a > 0 ? RatioKind::Infinite : RatioKind::Undefined;
  }
  /// a/b for finite ratios; +inf when b == 0 < a; nullopt when a == b == 0.
  std::optional<double> s() const;

  /// Strictly more switches in direction `d` than in the opposite one.
  bool favors(SwitchDirection d) const { return d == SwitchDirection::EnToX ? a > b : b > a; }

  SwitchStats& operator+=(const SwitchStats& o) {
    a += o.a;
    b += o.b;
    return *this;
  }
  friend bool operator==(const SwitchStats&, const SwitchStats&) = default;
};

std::vector<SwitchPoint> detect_switch_points(const Sentence& sentence, const SwitchOptions& options = {});

SwitchStats sentence_stats(const Sentence& sentence, const SwitchOptions& options = {});
SwitchStats corpus_stats(const Corpus& corpus, const SwitchOptions& options = {});

struct HistogramRow {
  double fraction = 0.0;
  std::size_t n_sentences = 0;
  SwitchStats stats;
};

/// Prefix counts over the first ceil(f * N) sentences for each fraction.
/// Fractions must be strictly increasing within (0, 1].
std::vector<HistogramRow> direction_histogram(const Corpus& corpus, const std::vector<double>& fractions,
                                              const SwitchOptions& options = {});

/// Throws InvalidFractions unless strictly increasing within (0, 1].
void check_fractions(const std::vector<double>& fractions);

/// ceil(f * n) guarded against representation error; at least 1 when n > 0.
std::size_t prefix_size(double fraction, std::size_t n);

}  // namespace cstag
