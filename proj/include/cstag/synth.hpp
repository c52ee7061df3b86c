#pragma once

// Seeded synthetic code-switched corpora with known ground truth, and
// direction-targeted label corruption for controlled asymmetry experiments.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cstag/corpus.hpp"
#include "cstag/switchpoint.hpp"

namespace cstag {

enum class StartLanguage { Matrix, Embedded };

struct GeneratorSpec {
  Task task = Task::Pos;
  /// Per-token probability that the language chain leaves Matrix / Embedded.
  double p_en_to_x = 0.3;
  double p_x_to_en = 0.1;
  /// Probability that a position holds a Neutral token outside the chain.
  double p_neutral = 0.1;
  std::size_t min_len = 5;
  std::size_t max_len = 20;
  StartLanguage start = StartLanguage::Matrix;
  std::string matrix_tag = "en";
  std::string embedded_tag = "hi";
  std::string neutral_tag = "univ";
  /// Words per (language, label) cell. Cells are pairwise disjoint.
  std::map<std::pair<LangClass, std::string>, std::vector<std::string>> vocab;
  /// Label distribution per language (Matrix, Embedded, Neutral). For NER
  /// these are the labels that may open a token: `O` and `B-*`.
  std::map<LangClass, std::vector<std::pair<std::string, double>>> label_weights;
  /// NER: probability that an open entity continues with I-<type>.
  double ner_continue = 0.4;
  /// Word rank r within a cell is drawn with weight 1 / (r + 1)^zipf.
  double zipf = 1.0;
  std::uint64_t seed = 7;
  std::size_t n_sentences = 1000;

  /// Throws InvalidSpec.
  void validate() const;
  nlohmann::json to_json() const;
  /// SHA-256 of the canonical JSON form.
  std::string digest() const;
};

struct VocabOptions {
  std::size_t words_per_cell = 40;
  /// Fraction of words in a cell that end in the cell's characteristic suffix.
  double suffix_rate = 0.5;
  std::uint64_t seed = 1;
};

/// Label inventory, distributions and pseudo-word vocabularies for `task`.
/// Matrix and Embedded words are drawn from disjoint syllable inventories.
GeneratorSpec default_generator_spec(Task task, const VocabOptions& vocab = {});

/// Lang map covering the tags a spec emits.
LangMap generator_lang_map(const GeneratorSpec& spec);

/// Two-state Markov chain over Matrix/Embedded per sentence, Neutral tokens
/// interleaved outside the chain. Throws EmptyCorpus for n_sentences == 0.
Corpus generate(const GeneratorSpec& spec);

enum class CorruptionScope { SwitchTokenOnly, SwitchRun };

struct CorruptionSpec {
  SwitchDirection target = SwitchDirection::EnToX;
  double p_corrupt = 0.6;
  CorruptionScope scope = CorruptionScope::SwitchTokenOnly;
};

/// Replaces the label of each target-direction switch token (or every
/// non-Neutral token of its run) with probability p_corrupt by a different
/// label drawn uniformly from the corpus alphabet. NER replacements are
/// restricted to labels that keep the sentence BIO-valid; a token with no such
/// alternative keeps its label.
Corpus corrupt(const Corpus& corpus, const CorruptionSpec& spec, std::uint64_t seed,
               const SwitchOptions& options = {});

}  // namespace cstag
