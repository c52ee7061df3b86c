#pragma once

// Data model and TSV reader/writer for code-switched, sequence-labeled text.
//
// File format: one token per line as `surface<TAB>label<TAB>langtag`, blank
// lines separate sentences, and lines starting with `#` are comments. Two
// comment forms carry data: `# sent_id = <id>` right before a sentence sets
// its id, and `# weak = true` marks a sentence whose labels were produced by a
// model. Comment lines before the first sentence form the corpus header.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cstag/error.hpp"

namespace cstag {

enum class Task { Pos, Ner };

std::string_view to_string(Task task);
Task parse_task(std::string_view text);

/// Label placeholder used by unlabeled corpora.
inline constexpr std::string_view kNoLabel = "_";

enum class LangClass { Matrix, Embedded, Neutral };

std::string_view to_string(LangClass cls);

struct LanguageTag {
  LangClass cls = LangClass::Neutral;
  std::string raw;

  friend bool operator==(const LanguageTag&, const LanguageTag&) = default;
};

/// Maps raw language tags found in corpora onto Matrix/Embedded/Neutral.
class LangMap {
 public:
  /// en -> Matrix; hi, es, te, bn -> Embedded; univ, other, ne, mixed,
  /// unknown, und -> Neutral. Also accepts the lang1/lang2 convention.
  static LangMap defaults();

  /// Reads `rawtag<TAB>{matrix|embedded|neutral}` lines.
  static LangMap load(const std::filesystem::path& path);
  static LangMap parse(std::istream& in, const std::string& source_name);

  void set(std::string raw, LangClass cls) { table_[std::move(raw)] = cls; }

  /// Throws UnknownLanguageTag for unmapped tags unless lenient, in which
  /// case they map to Neutral.
  LanguageTag resolve(std::string_view raw) const;

  bool lenient() const { return lenient_; }
  void set_lenient(bool lenient) { lenient_ = lenient; }

  const std::map<std::string, LangClass, std::less<>>& table() const { return table_; }

 private:
  std::map<std::string, LangClass, std::less<>> table_;
  bool lenient_ = false;
};

struct Token {
  std::string surface;
  std::string label;
  LanguageTag lang;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  bool weak = false;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Validated, immutable collection of sentences sharing one task.
class Corpus {
 public:
  Corpus() = default;

  /// Validates every invariant and derives the label alphabet and language
  /// pair. Throws on the first violation.
  Corpus(Task task, std::vector<Sentence> sentences, std::vector<std::string> header = {});

  Task task() const { return task_; }
  const std::vector<Sentence>& sentences() const { return sentences_; }
  const Sentence& operator[](std::size_t i) const { return sentences_[i]; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  std::size_t token_count() const;

  const std::set<std::string>& label_alphabet() const { return label_alphabet_; }
  /// (matrix raw tag, embedded raw tag) as first observed; empty when absent.
  const std::pair<std::string, std::string>& language_pair() const { return language_pair_; }
  const std::vector<std::string>& header() const { return header_; }

  /// True when no token carries the `_` placeholder.
  bool is_labeled() const;
  /// True when every token carries the `_` placeholder.
  bool is_unlabeled() const;

  auto begin() const { return sentences_.begin(); }
  auto end() const { return sentences_.end(); }

  /// Sentences and task equal; header is metadata and not compared.
  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.task_ == b.task_ && a.sentences_ == b.sentences_;
  }

 private:
  Task task_ = Task::Pos;
  std::vector<Sentence> sentences_;
  std::vector<std::string> header_;
  std::set<std::string> label_alphabet_;
  std::pair<std::string, std::string> language_pair_;
};

struct ParseOptions {
  /// Rewrite an `I-t` that does not continue a `t` chunk to `B-t` instead of
  /// rejecting the sentence.
  bool repair_bio = false;
};

Corpus parse_corpus(const std::filesystem::path& path, Task task, const LangMap& lang_map,
                    const ParseOptions& options = {});
/// `source_name` is used for default sentence ids and error messages.
Corpus parse_corpus(std::istream& in, const std::string& source_name, Task task,
                    const LangMap& lang_map, const ParseOptions& options = {});

void serialize_corpus(const Corpus& corpus, const std::filesystem::path& path);
void serialize_corpus(const Corpus& corpus, std::ostream& out);

struct SplitFractions {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  Corpus train;
  Corpus dev;
  Corpus test;
};

/// Seeded sentence-level shuffle then floor allocation of dev and test, with
/// the remainder going to train.
CorpusSplit split_corpus(const Corpus& corpus, const SplitFractions& fractions, std::uint64_t seed);

/// Replaces every label with `_`.
Corpus strip_labels(const Corpus& corpus);

/// Sentences at the given positions, in the given order.
Corpus select_sentences(const Corpus& corpus, const std::vector<std::size_t>& indices);

/// First `n` sentences.
Corpus prefix(const Corpus& corpus, std::size_t n);

/// Concatenation; tasks must agree.
Corpus concat(const Corpus& a, const Corpus& b);

// BIO helpers shared by validation, corruption and chunk scoring.
namespace bio {

/// True for `O`, `B-<type>` or `I-<type>` with a non-empty type.
bool is_well_formed(std::string_view label);
/// Chunk type of a B-/I- label; empty for `O`.
std::string_view type_of(std::string_view label);
bool is_inside(std::string_view label);
bool is_begin(std::string_view label);

/// True if `label` may follow `previous` (empty `previous` = sentence start).
bool may_follow(std::string_view previous, std::string_view label);

/// Index of the first invalid position, or labels.size() if valid.
std::size_t first_violation(const std::vector<std::string>& labels);

/// Rewrites every dangling `I-t` to `B-t`.
void repair(std::vector<std::string>& labels);

}  // namespace bio

std::vector<std::string> labels_of(const Sentence& sentence);

}  // namespace cstag
