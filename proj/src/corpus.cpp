#include "cstag/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "cstag/rng.hpp"

namespace cstag {

namespace {

bool has_whitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  });
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

// Returns an empty string when the token is acceptable.
std::string token_problem(const Token& token, Task task) {
  if (token.surface.empty()) return "empty surface";
  if (has_whitespace(token.surface)) return "surface contains whitespace: '" + token.surface + "'";
  if (token.surface.find('#') != std::string::npos)
    return "surface contains '#': '" + token.surface + "'";
  if (token.label.empty()) return "empty label";
  if (has_whitespace(token.label)) return "label contains whitespace: '" + token.label + "'";
  if (token.lang.raw.empty() || has_whitespace(token.lang.raw)) return "bad language tag";
  if (task == Task::Ner && token.label != kNoLabel && !bio::is_well_formed(token.label))
    return "not a BIO label: '" + token.label + "'";
  return {};
}

// Sentences are either fully labeled or fully `_`.
bool sentence_unlabeled(const Sentence& s) {
  return std::all_of(s.tokens.begin(), s.tokens.end(),
                     [](const Token& t) { return t.label == kNoLabel; });
}

bool sentence_mixed(const Sentence& s) {
  bool any_blank = false, any_label = false;
  for (const auto& t : s.tokens) (t.label == kNoLabel ? any_blank : any_label) = true;
  return any_blank && any_label;
}

// Attribute comments: `# key = value`.
bool parse_attribute(std::string_view comment, std::string& key, std::string& value) {
  auto eq = comment.find('=');
  if (eq == std::string_view::npos) return false;
  key = trim(comment.substr(0, eq));
  value = trim(comment.substr(eq + 1));
  return key == "sent_id" || key == "weak";
}

}  // namespace

std::string_view to_string(Task task) { return task == Task::Pos ? "pos" : "ner"; }

Task parse_task(std::string_view text) {
  if (text == "pos" || text == "POS") return Task::Pos;
  if (text == "ner" || text == "NER") return Task::Ner;
  throw Error(ErrorCode::InvalidConfig, "unknown task '" + std::string(text) + "'");
}

std::string_view to_string(LangClass cls) {
  switch (cls) {
    case LangClass::Matrix: return "matrix";
    case LangClass::Embedded: return "embedded";
    case LangClass::Neutral: return "neutral";
  }
  return "neutral";
}

// ---------------------------------------------------------------------------
// LangMap

LangMap LangMap::defaults() {
  LangMap m;
  for (auto t : {"en", "eng", "lang1"}) m.set(t, LangClass::Matrix);
  for (auto t : {"hi", "es", "te", "bn", "spa", "lang2"}) m.set(t, LangClass::Embedded);
  for (auto t : {"univ", "other", "ne", "mixed", "unknown", "und", "ambiguous", "fw"})
    m.set(t, LangClass::Neutral);
  return m;
}

LangMap LangMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open language map " + path.string());
  return parse(in, path.string());
}

LangMap LangMap::parse(std::istream& in, const std::string& source_name) {
  LangMap m;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw Error(ErrorCode::MalformedLine,
                  source_name + ":" + std::to_string(lineno) + ": expected rawtag<TAB>class");
    std::string raw = line.substr(0, tab);
    std::string cls = line.substr(tab + 1);
    if (cls == "matrix") m.set(raw, LangClass::Matrix);
    else if (cls == "embedded") m.set(raw, LangClass::Embedded);
    else if (cls == "neutral") m.set(raw, LangClass::Neutral);
    else
      throw Error(ErrorCode::MalformedLine, source_name + ":" + std::to_string(lineno) +
                                                ": unknown class '" + cls + "'");
  }
  return m;
}

LanguageTag LangMap::resolve(std::string_view raw) const {
  auto it = table_.find(raw);
  if (it != table_.end()) return {it->second, std::string(raw)};
  if (lenient_) return {LangClass::Neutral, std::string(raw)};
  throw Error(ErrorCode::UnknownLanguageTag, "unmapped language tag '" + std::string(raw) + "'");
}

// ---------------------------------------------------------------------------
// BIO

namespace bio {

bool is_well_formed(std::string_view label) {
  if (label == "O") return true;
  return label.size() > 2 && (label[0] == 'B' || label[0] == 'I') && label[1] == '-';
}

std::string_view type_of(std::string_view label) {
  if (label.size() > 2 && label[1] == '-') return label.substr(2);
  return {};
}

bool is_inside(std::string_view label) { return label.size() > 2 && label[0] == 'I' && label[1] == '-'; }
bool is_begin(std::string_view label) { return label.size() > 2 && label[0] == 'B' && label[1] == '-'; }

bool may_follow(std::string_view previous, std::string_view label) {
  if (!is_inside(label)) return true;
  if (previous.empty() || previous == "O") return false;
  return type_of(previous) == type_of(label);
}

std::size_t first_violation(const std::vector<std::string>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::string_view prev = i == 0 ? std::string_view{} : std::string_view(labels[i - 1]);
    if (!may_follow(prev, labels[i])) return i;
  }
  return labels.size();
}

void repair(std::vector<std::string>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::string_view prev = i == 0 ? std::string_view{} : std::string_view(labels[i - 1]);
    if (!may_follow(prev, labels[i])) labels[i][0] = 'B';
  }
}

}  // namespace bio

std::vector<std::string> labels_of(const Sentence& sentence) {
  std::vector<std::string> out;
  out.reserve(sentence.tokens.size());
  for (const auto& t : sentence.tokens) out.push_back(t.label);
  return out;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(Task task, std::vector<Sentence> sentences, std::vector<std::string> header)
    : task_(task), sentences_(std::move(sentences)), header_(std::move(header)) {
  for (const auto& s : sentences_) {
    if (s.tokens.empty()) throw Error(ErrorCode::InvalidToken, "sentence '" + s.id + "' is empty");
    for (const auto& t : s.tokens) {
      if (auto problem = token_problem(t, task_); !problem.empty())
        throw Error(ErrorCode::InvalidToken, "sentence '" + s.id + "': " + problem);
      label_alphabet_.insert(t.label);
      if (t.lang.cls == LangClass::Matrix && language_pair_.first.empty())
        language_pair_.first = t.lang.raw;
      if (t.lang.cls == LangClass::Embedded && language_pair_.second.empty())
        language_pair_.second = t.lang.raw;
    }
    if (sentence_mixed(s))
      throw Error(ErrorCode::InvalidToken, "sentence '" + s.id + "' mixes `_` and real labels");
    if (task_ == Task::Ner && !sentence_unlabeled(s)) {
      auto labels = labels_of(s);
      auto bad = bio::first_violation(labels);
      if (bad != labels.size())
        throw Error(ErrorCode::InvalidBioSequence,
                    "sentence '" + s.id + "' token " + std::to_string(bad) + ": '" + labels[bad] +
                        "' does not continue a chunk of the same type");
    }
  }
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences_) n += s.tokens.size();
  return n;
}

bool Corpus::is_labeled() const { return label_alphabet_.count(std::string(kNoLabel)) == 0; }

bool Corpus::is_unlabeled() const {
  return label_alphabet_.size() == 1 && *label_alphabet_.begin() == kNoLabel;
}

// ---------------------------------------------------------------------------
// Reading and writing

Corpus parse_corpus(const std::filesystem::path& path, Task task, const LangMap& lang_map,
                    const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open corpus " + path.string());
  return parse_corpus(in, path.filename().string(), task, lang_map, options);
}

Corpus parse_corpus(std::istream& in, const std::string& source_name, Task task,
                    const LangMap& lang_map, const ParseOptions& options) {
  std::vector<Sentence> sentences;
  std::vector<std::string> header;
  Sentence current;
  std::vector<std::size_t> current_lines;
  std::string pending_id;
  bool pending_weak = false;
  bool seen_token = false;

  auto where = [&](std::size_t lineno) { return source_name + ":" + std::to_string(lineno); };

  auto flush = [&]() {
    if (current.tokens.empty()) return;
    current.id = pending_id.empty()
                     ? source_name + ":" + std::to_string(sentences.size() + 1)
                     : pending_id;
    current.weak = pending_weak;
    if (task == Task::Ner && !sentence_unlabeled(current) && !sentence_mixed(current)) {
      auto labels = labels_of(current);
      auto bad = bio::first_violation(labels);
      if (bad != labels.size()) {
        if (!options.repair_bio)
          throw Error(ErrorCode::InvalidBioSequence,
                      where(current_lines[bad]) + ": '" + labels[bad] +
                          "' does not continue a chunk of the same type");
        bio::repair(labels);
        for (std::size_t i = 0; i < labels.size(); ++i) current.tokens[i].label = labels[i];
      }
    }
    if (sentence_mixed(current))
      throw Error(ErrorCode::MalformedLine,
                  where(current_lines.front()) + ": sentence mixes `_` and real labels");
    sentences.push_back(std::move(current));
    current = Sentence{};
    current_lines.clear();
    pending_id.clear();
    pending_weak = false;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      std::string_view comment(line);
      comment.remove_prefix(1);
      std::string key, value;
      if (current.tokens.empty() && parse_attribute(comment, key, value)) {
        if (key == "sent_id") pending_id = value;
        else pending_weak = (value == "true" || value == "1");
      } else if (!seen_token) {
        if (!comment.empty() && comment.front() == ' ') comment.remove_prefix(1);
        header.emplace_back(comment);
      }
      continue;
    }

    std::string_view rest(line);
    std::vector<std::string_view> cols;
    for (std::size_t tab; (tab = rest.find('\t')) != std::string_view::npos;) {
      cols.push_back(rest.substr(0, tab));
      rest.remove_prefix(tab + 1);
    }
    cols.push_back(rest);
    if (cols.size() != 3)
      throw Error(ErrorCode::MalformedLine, where(lineno) + ": expected 3 tab-separated columns, got " +
                                                std::to_string(cols.size()));

    Token token;
    token.surface = std::string(cols[0]);
    token.label = std::string(cols[1]);
    try {
      token.lang = lang_map.resolve(cols[2]);
    } catch (const Error& e) {
      throw Error(e.code(), where(lineno) + ": unmapped language tag '" + std::string(cols[2]) + "'");
    }
    if (auto problem = token_problem(token, task); !problem.empty())
      throw Error(ErrorCode::MalformedLine, where(lineno) + ": " + problem);
    current.tokens.push_back(std::move(token));
    current_lines.push_back(lineno);
    seen_token = true;
  }
  flush();

  if (sentences.empty()) throw Error(ErrorCode::EmptyCorpus, source_name + " contains no sentences");
  return Corpus(task, std::move(sentences), std::move(header));
}

void serialize_corpus(const Corpus& corpus, std::ostream& out) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "refusing to write an empty corpus");
  for (const auto& h : corpus.header()) out << "# " << h << '\n';
  for (const auto& s : corpus) {
    out << "# sent_id = " << s.id << '\n';
    if (s.weak) out << "# weak = true\n";
    for (const auto& t : s.tokens) out << t.surface << '\t' << t.label << '\t' << t.lang.raw << '\n';
    out << '\n';
  }
}

void serialize_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "refusing to write an empty corpus");
  std::ostringstream buffer;
  serialize_corpus(corpus, buffer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << buffer.str();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Transformations

CorpusSplit split_corpus(const Corpus& corpus, const SplitFractions& fractions, std::uint64_t seed) {
  const double parts[] = {fractions.train, fractions.dev, fractions.test};
  for (double f : parts)
    if (!(f > 0.0)) throw Error(ErrorCode::InvalidFractions, "split fractions must be positive");
  if (std::abs(fractions.train + fractions.dev + fractions.test - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidFractions, "split fractions must sum to 1");

  const std::size_t n = corpus.size();
  // The epsilon absorbs representation error such as 0.7 * 10 = 6.999...
  auto floor_share = [n](double f) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9));
  };
  const std::size_t n_dev = floor_share(fractions.dev);
  const std::size_t n_test = floor_share(fractions.test);
  if (n_dev == 0 || n_test == 0 || n_dev + n_test >= n)
    throw Error(ErrorCode::DegenerateSplit, "a split of " + std::to_string(n) +
                                                " sentences would leave a part empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  const std::size_t n_train = n - n_dev - n_test;
  auto take = [&](std::size_t from, std::size_t count) {
    std::vector<std::size_t> idx(order.begin() + from, order.begin() + from + count);
    std::sort(idx.begin(), idx.end());
    return select_sentences(corpus, idx);
  };
  return {take(0, n_train), take(n_train, n_dev), take(n_train + n_dev, n_test)};
}

Corpus strip_labels(const Corpus& corpus) {
  std::vector<Sentence> out = corpus.sentences();
  for (auto& s : out) {
    s.weak = false;
    for (auto& t : s.tokens) t.label = std::string(kNoLabel);
  }
  return Corpus(corpus.task(), std::move(out), corpus.header());
}

Corpus select_sentences(const Corpus& corpus, const std::vector<std::size_t>& indices) {
  std::vector<Sentence> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(corpus[i]);
  return Corpus(corpus.task(), std::move(out), corpus.header());
}

Corpus prefix(const Corpus& corpus, std::size_t n) {
  n = std::min(n, corpus.size());
  std::vector<Sentence> out(corpus.sentences().begin(), corpus.sentences().begin() + n);
  return Corpus(corpus.task(), std::move(out), corpus.header());
}

Corpus concat(const Corpus& a, const Corpus& b) {
  if (!a.empty() && !b.empty() && a.task() != b.task())
    throw Error(ErrorCode::TaskMismatch, "cannot concatenate corpora of different tasks");
  std::vector<Sentence> out = a.sentences();
  out.insert(out.end(), b.sentences().begin(), b.sentences().end());
  return Corpus(a.empty() ? b.task() : a.task(), std::move(out), a.header());
}

}  // namespace cstag
