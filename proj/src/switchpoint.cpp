#include "cstag/switchpoint.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace cstag {

std::string_view to_string(SwitchDirection d) { return d == SwitchDirection::EnToX ? "en2x" : "x2en"; }

SwitchDirection parse_direction(std::string_view text) {
  if (text == "en2x") return SwitchDirection::EnToX;
  if (text == "x2en") return SwitchDirection::XToEn;
  throw Error(ErrorCode::InvalidConfig, "unknown direction '" + std::string(text) + "' (en2x|x2en)");
}

std::optional<double> SwitchStats::s() const {
  switch (ratio_kind()) {
    case RatioKind::Finite: return static_cast<double>(a) / static_cast<double>(b);
    case RatioKind::Infinite: return std::numeric_limits<double>::infinity();
    case RatioKind::Undefined: break;
  }
  return std::nullopt;
}

std::vector<SwitchPoint> detect_switch_points(const Sentence& sentence, const SwitchOptions& options) {
  std::vector<SwitchPoint> points;
  // Neutral doubles as "no language seen yet".
  LangClass previous = LangClass::Neutral;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    LangClass cls = sentence.tokens[i].lang.cls;
    if (cls == LangClass::Neutral) {
      if (options.neutral_breaks) previous = LangClass::Neutral;
      continue;
    }
    if (previous != LangClass::Neutral && previous != cls)
      points.push_back({i, cls == LangClass::Embedded ? SwitchDirection::EnToX : SwitchDirection::XToEn});
    previous = cls;
  }
  return points;
}

SwitchStats sentence_stats(const Sentence& sentence, const SwitchOptions& options) {
  SwitchStats st;
  for (const auto& p : detect_switch_points(sentence, options))
    (p.direction == SwitchDirection::EnToX ? st.a : st.b) += 1;
  return st;
}

SwitchStats corpus_stats(const Corpus& corpus, const SwitchOptions& options) {
  SwitchStats total;
  for (const auto& s : corpus) total += sentence_stats(s, options);
  return total;
}

void check_fractions(const std::vector<double>& fractions) {
  if (fractions.empty()) throw Error(ErrorCode::InvalidFractions, "no fractions given");
  double last = 0.0;
  for (double f : fractions) {
    if (!(f > last) || f > 1.0)
      throw Error(ErrorCode::InvalidFractions, "fractions must be strictly increasing within (0, 1]");
    last = f;
  }
}

std::size_t prefix_size(double fraction, std::size_t n) {
  auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  if (k == 0 && n > 0) k = 1;
  return k > n ? n : k;
}

std::vector<HistogramRow> direction_histogram(const Corpus& corpus, const std::vector<double>& fractions,
                                              const SwitchOptions& options) {
  check_fractions(fractions);
  std::vector<HistogramRow> rows;
  SwitchStats running;
  std::size_t consumed = 0;
  for (double f : fractions) {
    const std::size_t upto = prefix_size(f, corpus.size());
    for (; consumed < upto; ++consumed) running += sentence_stats(corpus[consumed], options);
    rows.push_back({f, upto, running});
  }
  return rows;
}

}  // namespace cstag
