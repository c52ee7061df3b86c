#pragma once

// Averaged structured perceptron over a first-order label chain. One class
// serves both as the end-task model and as the annotator in self-training.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cstag/corpus.hpp"
#include "cstag/features.hpp"

namespace cstag {

struct TrainConfig {
  int epochs = 10;
  std::uint64_t seed = 0;
  bool shuffle = true;
  TemplateSet templates = all_templates();

  /// Throws InvalidConfig when epochs < 1.
  void validate() const;
};

/// Joint label used in LangOutput mode. Tab cannot occur in either part.
std::string joint_label(std::string_view label, std::string_view lang);
/// Task label of an internal label (identity outside LangOutput).
std::string_view project_label(std::string_view internal_label);

/// One stored parameter, as exposed for inspection and tests.
struct WeightEntry {
  std::string feature;  ///< encoded FeatureKey
  std::string label;    ///< internal label
  double weight = 0.0;
  double averaged = 0.0;
};

class TaggerModel {
 public:
  TaggerModel() = default;
  TaggerModel(Task task, TaggerMode mode, TemplateSet templates = all_templates());

  Task task() const { return task_; }
  TaggerMode mode() const { return mode_; }
  const TemplateSet& templates() const { return templates_; }

  /// Internal label alphabet in decoding order; joint labels in LangOutput.
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::size_t> label_index(std::string_view label) const;
  /// Appends a label if new and returns its index.
  std::size_t add_label(const std::string& label);

  /// Number of perceptron steps (sentence visits) the averages cover.
  std::uint64_t updates_seen() const { return steps_; }
  std::size_t feature_count() const { return features_.size(); }

  /// Averaged (inference-time) weight; zero for unknown keys or labels.
  double weight(const FeatureKey& key, std::string_view label) const;
  /// Current perceptron weight.
  double raw_weight(const FeatureKey& key, std::string_view label) const;
  /// Sets both the current and the averaged weight to `value`. The label
  /// must already be in the alphabet.
  void set_weight(const FeatureKey& key, std::string_view label, double value);

  /// Every parameter with a non-zero weight or average, in a stable order.
  std::vector<WeightEntry> entries() const;

  /// Same task, mode, templates, labels, step count and non-zero parameters.
  friend bool operator==(const TaggerModel& a, const TaggerModel& b);

 private:
  friend class PerceptronTrainer;
  friend struct ModelAccess;

  std::size_t intern_feature(const std::string& encoded);
  std::optional<std::uint32_t> find_feature(std::string_view encoded) const;
  std::size_t label_count() const { return labels_.size(); }
  std::size_t start_row() const { return labels_.size(); }
  void recompute_averages();

  Task task_ = Task::Pos;
  TaggerMode mode_ = TaggerMode::Plain;
  TemplateSet templates_ = all_templates();

  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> label_lookup_;
  std::vector<std::string> features_;
  std::unordered_map<std::string, std::uint32_t> feature_lookup_;

  // Emission parameters, row-major [feature][label].
  std::vector<double> weights_;
  std::vector<double> accum_;  // sum of (steps before update) * delta
  std::vector<double> averaged_;
  // Transition parameters, [previous label or start row][label].
  std::vector<double> trans_weights_;
  std::vector<double> trans_accum_;
  std::vector<double> trans_averaged_;

  std::uint64_t steps_ = 0;
};

/// Called after every training step with the model in its current state.
using StepObserver = std::function<void(const TaggerModel&)>;

/// Highest-scoring internal label sequence under the averaged weights; ties
/// go to the earlier label in the alphabet. Throws EmptyModel.
std::vector<std::string> viterbi_decode(const TaggerModel& model, const Sentence& sentence);

/// Averaged perceptron from scratch. Throws UnlabeledGold on `_` labels.
TaggerModel train(const Corpus& corpus, const TrainConfig& config, TaggerMode mode,
                  const StepObserver& observer = {});

/// Continues training from the model's weights and averaging state.
/// `expected_mode`, when given, must equal the model's mode (ModeMismatch).
TaggerModel fine_tune(TaggerModel model, const Corpus& corpus, const TrainConfig& config,
                      std::optional<TaggerMode> expected_mode = std::nullopt,
                      const StepObserver& observer = {});

/// Copy of `corpus` with labels replaced by predictions projected to task
/// labels. NER predictions have dangling I- tags rewritten to B-.
Corpus predict(const TaggerModel& model, const Corpus& corpus);

inline constexpr int kModelFormatVersion = 1;

/// CBOR container, or JSON text when the path ends in `.json`.
void save_model(const TaggerModel& model, const std::filesystem::path& path);
TaggerModel load_model(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_model(const TaggerModel& model);
std::string encode_model_json(const TaggerModel& model);
/// Accepts either encoding. Throws VersionMismatch or ParseError.
TaggerModel decode_model(const std::vector<std::uint8_t>& bytes);

}  // namespace cstag
