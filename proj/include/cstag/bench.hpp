#pragma once

// Biased-versus-random self-training comparison over several seeds, and the
// synthetic benchmark with train-set corruption on one switch direction.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cstag/corpus.hpp"
#include "cstag/metrics.hpp"
#include "cstag/selftrain.hpp"
#include "cstag/synth.hpp"

namespace cstag {

struct BenchData {
  Corpus labeled;
  Corpus dev;
  Corpus test;
  Corpus unlabeled;
};

struct SyntheticBenchOptions {
  Task task = Task::Pos;
  std::size_t n_labeled = 1500;
  std::size_t n_dev = 500;
  std::size_t n_test = 500;
  std::size_t n_unlabeled = 3000;
  double p_en_to_x = 0.2;
  double p_x_to_en = 0.4;
  double p_neutral = 0.1;
  std::size_t min_len = 5;
  std::size_t max_len = 15;
  VocabOptions vocab = {100, 0.5, 1};
  double zipf = 1.0;
  std::uint64_t seed = 7;
  CorruptionSpec corruption;
};

/// Generates one corpus and slices it into labeled/dev/test/unlabeled.
/// Only the labeled slice is corrupted; the unlabeled slice is stripped.
BenchData make_synthetic_bench(const SyntheticBenchOptions& options);

/// One row of a comparison table.
struct BenchRow {
  std::string name;
  double overall_acc = 0.0;
  /// Macro F1 for POS, chunk F1 for NER.
  double overall_f1 = 0.0;
  std::optional<double> x2en_acc, x2en_f1, en2x_acc, en2x_f1;
  std::optional<double> gap;
};

BenchRow bench_row(const std::string& name, const EvalReport& report);

struct SeedResult {
  std::uint64_t seed = 0;
  EvalReport baseline;  ///< labeled data only
  EvalReport selftr;
  EvalReport random;
  std::vector<std::size_t> schedule;
  std::size_t selftr_best_iteration = 0;
  std::size_t random_best_iteration = 0;
  std::string selftr_stop_reason;
  /// Dev headline metric of the initial model followed by one entry per
  /// iteration, for both loops.
  std::vector<double> selftr_dev_metrics;
  std::vector<double> random_dev_metrics;
};

struct BenchReport {
  Task task = Task::Pos;
  std::vector<SeedResult> seeds;
  BenchRow mean_baseline, mean_selftr, mean_random;
  /// mean gap(selfTr) - mean gap(random)
  std::optional<double> gap_delta;
  /// mean overall acc(selfTr) - mean overall acc(random)
  double acc_delta = 0.0;
  /// Seeds where gap(selfTr) < gap(random).
  std::size_t seeds_with_smaller_gap = 0;
};

/// Seeds are config.seed, config.seed + 1, ... For each, self_train runs
/// first and random_baseline follows its batch schedule; both best models and
/// the labeled-only model are evaluated on `test`.
BenchReport run_bench(const Corpus& labeled, const Corpus& dev, const Corpus& test, const Corpus& unlabeled,
                      const SelfTrainConfig& config, std::size_t n_seeds);

nlohmann::json to_json(const BenchReport& report);
std::string format_bench_table(const BenchReport& report);

}  // namespace cstag
