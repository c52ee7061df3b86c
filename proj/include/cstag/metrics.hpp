#pragma once

// Overall and switch-point-restricted evaluation.
//
// Switch-point metrics are token-level: for each direction, the positions are
// the first tokens of new language runs (see switchpoint.hpp), accuracy is
// computed on those tokens and F1 is the macro average over the gold labels
// present there. NER uses BIO tags as plain labels at switch points; chunk F1
// is reported for the whole corpus only.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cstag/corpus.hpp"
#include "cstag/features.hpp"
#include "cstag/switchpoint.hpp"
#include "cstag/tagger.hpp"

namespace cstag {

struct TokenRef {
  std::size_t sentence = 0;
  std::size_t token = 0;
};

using PositionFilter = std::optional<std::span<const TokenRef>>;

/// Throws TaskMismatch, ShapeMismatch (different sentences or surfaces) or
/// UnlabeledGold.
void check_comparable(const Corpus& gold, const Corpus& pred);

/// correct / total over the filtered positions; nullopt if there are none.
std::optional<double> token_accuracy(const Corpus& gold, const Corpus& pred, PositionFilter positions = std::nullopt);

struct LabelScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  ///< gold count
  std::size_t predicted = 0;
};

/// Scores for every gold label present at the filtered positions.
std::map<std::string, LabelScores> per_label_scores(const Corpus& gold, const Corpus& pred,
                                                    PositionFilter positions = std::nullopt);

/// Unweighted mean of per-label F1 over gold labels present at the filtered
/// positions; nullopt if there are none.
std::optional<double> macro_f1(const Corpus& gold, const Corpus& pred, PositionFilter positions = std::nullopt);

struct Chunk {
  std::size_t sentence = 0;
  std::size_t begin = 0;
  std::size_t end = 0;  ///< exclusive
  std::string type;

  friend auto operator<=>(const Chunk&, const Chunk&) = default;
};

/// Maximal B/I spans; a dangling I-t opens a new chunk.
std::vector<Chunk> extract_chunks(std::size_t sentence_index, const std::vector<std::string>& labels);

/// Micro F1 over exact (span, type) matches: 2 * tp / (|gold| + |pred|),
/// and 1.0 when both sides have no chunks. Throws TaskMismatch for POS.
double chunk_f1(const Corpus& gold, const Corpus& pred);

struct DirectionScores {
  double acc = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  Task task = Task::Pos;
  double overall_acc = 0.0;
  double overall_f1 = 0.0;
  std::optional<double> chunk_f1;  ///< NER only
  /// Directions without switch points are absent.
  std::map<SwitchDirection, DirectionScores> per_direction;
  std::size_t n_tokens = 0;
  std::size_t n_switch_points = 0;

  std::optional<DirectionScores> direction(SwitchDirection d) const;
  /// |f1(EnToX) - f1(XToEn)| when both directions are present.
  std::optional<double> gap() const;
  /// Model-selection metric: accuracy for POS, chunk F1 for NER.
  double headline() const;
};

/// Positions of the switch-point tokens of one direction in `corpus`.
std::vector<TokenRef> switch_positions(const Corpus& corpus, SwitchDirection direction,
                                       const SwitchOptions& options = {});

EvalReport switch_point_report(const Corpus& gold, const Corpus& pred, const SwitchOptions& options = {});

struct FractionRow {
  double fraction = 0.0;
  std::size_t n_train = 0;
  EvalReport dev_report;
};

/// Trains on the first ceil(f * N) training sentences for each fraction and
/// evaluates switch-point accuracy on `dev`.
std::vector<FractionRow> accuracy_by_fraction(const TrainConfig& config, TaggerMode mode, const Corpus& train,
                                              const Corpus& dev, const std::vector<double>& fractions,
                                              const SwitchOptions& options = {});

nlohmann::json to_json(const EvalReport& report);

/// Fixed-width table with Overall | X->en | en->X columns, Acc and F1 each,
/// in percent with two decimals; absent values print as `-`.
std::string format_report_table(const std::vector<std::pair<std::string, EvalReport>>& rows);

/// Percent with two decimals, as printed in tables.
std::string format_percent(std::optional<double> value);

}  // namespace cstag
