#pragma once

// Switch-point biased self-training and its size-matched random baseline.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cstag/corpus.hpp"
#include "cstag/features.hpp"
#include "cstag/metrics.hpp"
#include "cstag/switchpoint.hpp"
#include "cstag/tagger.hpp"

namespace cstag {

/// Auto uses PerformanceBased and falls back to RatioBased when the dev set
/// has no switch points at all.
enum class BiasMode { PerformanceBased, RatioBased, Auto };

std::string_view to_string(BiasMode mode);
/// "perf", "ratio" or "auto".
BiasMode parse_bias_mode(std::string_view text);

struct SelfTrainConfig {
  std::size_t batch_size = 400;
  std::size_t max_iterations = 5;
  std::size_t patience = 1;
  BiasMode bias_mode = BiasMode::Auto;
  /// Skips re-selection and biases every iteration toward this direction.
  std::optional<SwitchDirection> fix_direction;
  std::size_t min_biased_seed = 50;
  std::uint64_t seed = 0;
  int annotator_epochs = 5;
  int end_epochs = 5;
  TaggerMode mode = TaggerMode::Plain;
  TemplateSet templates = all_templates();
  /// Retrain the end model on the latest weak batch only.
  bool latest_only = false;
  /// Permit sentence ids shared between the unlabeled pool and dev (and test
  /// in run_bench).
  bool allow_overlap = false;
  SwitchOptions switch_options;

  /// Throws InvalidConfig.
  void validate() const;
  nlohmann::json to_json() const;
};

struct IterationRecord {
  std::size_t iteration = 0;  ///< 1-based
  /// Direction the batch was biased toward; absent for random batches.
  std::optional<SwitchDirection> bias_direction;
  std::size_t n_added = 0;
  EvalReport dev_report;
  std::size_t cumulative_augmented = 0;
  std::vector<std::string> added_ids;
};

struct SelfTrainResult {
  TaggerModel initial_model;
  TaggerModel best_model;
  /// 0 means the initial end model trained on labeled data only.
  std::size_t best_iteration = 0;
  EvalReport initial_dev_report;
  std::vector<IterationRecord> history;
  /// Labeled data plus the weak sentences behind best_model, flagged weak.
  Corpus augmented_corpus;
  std::string stop_reason;

  /// Dev headline metric of best_model.
  double best_metric() const;
};

/// Direction the annotator should be biased toward.
///
/// PerformanceBased: the direction with lower switch-point F1 on dev (ties:
/// lower accuracy, then EnToX); if only one direction occurs in dev, that one.
/// RatioBased: EnToX when s = a/b on `unlabeled` is below 1, else XToEn.
/// Throws NoSwitchPoints when the consulted corpus has none.
SwitchDirection select_bias_direction(const TaggerModel& model, const Corpus& dev, BiasMode mode,
                                      const Corpus& unlabeled, const SwitchOptions& options = {});

/// Up to n sentences drawn uniformly from those whose switch counts strictly
/// favor `direction`, in pool order. Throws NoEligibleSentences.
Corpus subsample_biased(const Corpus& pool, SwitchDirection direction, std::size_t n, std::uint64_t seed,
                        const SwitchOptions& options = {});

/// Up to n sentences drawn uniformly, in pool order. Throws EmptyPool.
Corpus subsample_random(const Corpus& pool, std::size_t n, std::uint64_t seed);

SelfTrainResult self_train(const Corpus& labeled, const Corpus& dev, const Corpus& unlabeled,
                           const SelfTrainConfig& config);

/// Same loop with random batches and an annotator trained on all labeled
/// data. With a schedule, iteration i adds schedule[i] sentences and the loop
/// runs the whole schedule without early stopping.
SelfTrainResult random_baseline(const Corpus& labeled, const Corpus& dev, const Corpus& unlabeled,
                                const SelfTrainConfig& config,
                                const std::optional<std::vector<std::size_t>>& schedule = std::nullopt);

/// n_added per iteration.
std::vector<std::size_t> batch_schedule(const SelfTrainResult& result);

nlohmann::json to_json(const IterationRecord& record);
nlohmann::json to_json(const SelfTrainResult& result);

}  // namespace cstag
