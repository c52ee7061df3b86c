#include "cstag/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cstag/digest.hpp"
#include "cstag/rng.hpp"

namespace cstag {

namespace {

constexpr const char* kMatrixConsonants[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z"};
constexpr const char* kMatrixVowels[] = {"a", "e", "i", "o", "u"};
constexpr const char* kMatrixSuffixes[] = {"ing", "ed", "ly", "er", "ous", "al", "ful", "ness", "ist", "ize", "ant", "ive", "ment", "ion", "est", "ard"};
// Embedded stems always open with an aspirated consonant, so they contain an
// `h` and can never collide with Matrix words.
constexpr const char* kAspirated[] = {"kh", "gh", "bh", "ch", "dh", "jh", "th", "ph", "sh"};
constexpr const char* kEmbeddedConsonants[] = {"kh", "gh", "bh", "ch", "dh", "jh", "th", "ph", "sh", "r", "n", "m", "l", "k", "g", "y"};
constexpr const char* kEmbeddedVowels[] = {"a", "aa", "i", "ee", "u", "oo", "e", "o"};
constexpr const char* kEmbeddedSuffixes[] = {"waa", "kar", "enge", "iya", "pan", "wala", "gee", "ani", "ush", "ithi", "ko", "ne", "tar", "uni", "yam", "ogi"};
constexpr const char* kPunctuation[] = {".", ",", "!", "?", ":", ";", "...", "-", "(", ")", "!!", "@user"};

template <std::size_t N>
const char* pick(Rng& rng, const char* const (&items)[N]) {
  return items[rng.uniform_index(N)];
}

bool capitalized_label(const std::string& label) {
  return label == "PROPN" || bio::is_begin(label) || bio::is_inside(label);
}

std::string make_stem(Rng& rng, LangClass lang) {
  const std::size_t syllables = 1 + rng.uniform_index(2);
  std::string stem;
  if (lang == LangClass::Matrix) {
    for (std::size_t i = 0; i < syllables; ++i) {
      stem += pick(rng, kMatrixConsonants);
      stem += pick(rng, kMatrixVowels);
    }
  } else {
    stem += pick(rng, kAspirated);
    stem += pick(rng, kEmbeddedVowels);
    for (std::size_t i = 1; i < syllables; ++i) {
      stem += pick(rng, kEmbeddedConsonants);
      stem += pick(rng, kEmbeddedVowels);
    }
  }
  return stem;
}

std::vector<std::pair<std::string, double>> pos_distribution() {
  return {{"NOUN", 0.24}, {"VERB", 0.17}, {"ADJ", 0.08}, {"ADV", 0.06}, {"PRON", 0.10}, {"DET", 0.08},
          {"ADP", 0.10},  {"CONJ", 0.05}, {"PART", 0.04}, {"NUM", 0.03}, {"PROPN", 0.05}};
}

std::vector<std::pair<std::string, double>> ner_distribution() {
  return {{"O", 0.85}, {"B-PER", 0.06}, {"B-LOC", 0.05}, {"B-ORG", 0.04}};
}

std::size_t draw_weighted(Rng& rng, const std::vector<double>& cumulative) {
  const double x = rng.uniform01() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> cumulative_of(const std::vector<std::pair<std::string, double>>& dist) {
  std::vector<double> c;
  double sum = 0.0;
  for (const auto& [label, w] : dist) c.push_back(sum += w);
  return c;
}

std::vector<double> zipf_cumulative(std::size_t n, double exponent) {
  std::vector<double> c;
  double sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) c.push_back(sum += 1.0 / std::pow(static_cast<double>(r + 1), exponent));
  return c;
}

bool valid_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::string lang_key(LangClass c) { return std::string(to_string(c)); }

}  // namespace

// ---------------------------------------------------------------------------
// Spec

void GeneratorSpec::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); };
  if (!valid_probability(p_en_to_x) || !valid_probability(p_x_to_en)) fail("switch probabilities must lie in [0, 1]");
  if (!(p_neutral >= 0.0 && p_neutral < 1.0)) fail("p_neutral must lie in [0, 1)");
  if (!valid_probability(ner_continue)) fail("ner_continue must lie in [0, 1]");
  if (min_len < 1 || max_len < min_len) fail("sentence length range must satisfy 1 <= min <= max");
  if (zipf < 0.0) fail("zipf exponent must be non-negative");
  for (const auto* tag : {&matrix_tag, &embedded_tag, &neutral_tag})
    if (tag->empty() || tag->find_first_of(" \t\n") != std::string::npos) fail("bad language tag '" + *tag + "'");

  std::vector<LangClass> langs = {LangClass::Matrix, LangClass::Embedded};
  if (p_neutral > 0.0) langs.push_back(LangClass::Neutral);
  for (auto lang : langs) {
    auto it = label_weights.find(lang);
    if (it == label_weights.end() || it->second.empty()) fail("no label distribution for " + lang_key(lang));
    double total = 0.0;
    for (const auto& [label, w] : it->second) {
      if (!(w >= 0.0)) fail("negative label weight");
      total += w;
      if (task == Task::Ner && !(label == "O" || bio::is_begin(label)))
        fail("NER label distribution may only contain O and B-* labels");
      std::vector<std::string> needed = {label};
      if (task == Task::Ner && bio::is_begin(label)) needed.push_back("I-" + std::string(bio::type_of(label)));
      for (const auto& l : needed) {
        auto cell = vocab.find({lang, l});
        if (cell == vocab.end() || cell->second.empty()) fail("empty vocabulary cell (" + lang_key(lang) + ", " + l + ")");
      }
    }
    if (!(total > 0.0)) fail("label weights of " + lang_key(lang) + " sum to zero");
  }

  std::map<std::string, LangClass> owner;
  for (const auto& [cell, words] : vocab)
    for (const auto& w : words) {
      if (w.empty() || w.find_first_of(" \t\n\r#") != std::string::npos) fail("invalid word '" + w + "'");
      auto [it, inserted] = owner.emplace(w, cell.first);
      if (!inserted && it->second != cell.first) fail("word '" + w + "' appears in more than one language");
    }
}

nlohmann::json GeneratorSpec::to_json() const {
  nlohmann::json j;
  j["task"] = to_string(task);
  j["p_en_to_x"] = p_en_to_x;
  j["p_x_to_en"] = p_x_to_en;
  j["p_neutral"] = p_neutral;
  j["min_len"] = min_len;
  j["max_len"] = max_len;
  j["start"] = start == StartLanguage::Matrix ? "matrix" : "embedded";
  j["tags"] = {matrix_tag, embedded_tag, neutral_tag};
  j["ner_continue"] = ner_continue;
  j["zipf"] = zipf;
  j["seed"] = seed;
  j["n_sentences"] = n_sentences;
  nlohmann::json v = nlohmann::json::array();
  for (const auto& [cell, words] : vocab) v.push_back({lang_key(cell.first), cell.second, words});
  j["vocab"] = v;
  nlohmann::json lw = nlohmann::json::object();
  for (const auto& [lang, dist] : label_weights) {
    nlohmann::json d = nlohmann::json::array();
    for (const auto& [label, w] : dist) d.push_back({label, w});
    lw[lang_key(lang)] = d;
  }
  j["label_weights"] = lw;
  return j;
}

std::string GeneratorSpec::digest() const { return sha256_hex(to_json().dump()); }

GeneratorSpec default_generator_spec(Task task, const VocabOptions& options) {
  GeneratorSpec spec;
  spec.task = task;
  const auto dist = task == Task::Pos ? pos_distribution() : ner_distribution();
  spec.label_weights[LangClass::Matrix] = dist;
  spec.label_weights[LangClass::Embedded] = dist;
  const std::string neutral_label = task == Task::Pos ? "PUNCT" : "O";
  spec.label_weights[LangClass::Neutral] = {{neutral_label, 1.0}};
  spec.vocab[{LangClass::Neutral, neutral_label}] =
      std::vector<std::string>(std::begin(kPunctuation), std::end(kPunctuation));

  std::vector<std::string> labels;
  for (const auto& [label, w] : dist) {
    labels.push_back(label);
    if (bio::is_begin(label)) labels.push_back("I-" + std::string(bio::type_of(label)));
  }

  Rng rng(options.seed);
  std::set<std::string> used;
  for (auto lang : {LangClass::Matrix, LangClass::Embedded}) {
    for (std::size_t li = 0; li < labels.size(); ++li) {
      const auto& label = labels[li];
      const std::size_t n_suffixes = std::size(kMatrixSuffixes);
      const std::string suffix = lang == LangClass::Matrix ? kMatrixSuffixes[li % n_suffixes]
                                                            : kEmbeddedSuffixes[li % std::size(kEmbeddedSuffixes)];
      auto& cell = spec.vocab[{lang, label}];
      while (cell.size() < options.words_per_cell) {
        std::string word = make_stem(rng, lang);
        if (rng.bernoulli(options.suffix_rate)) word += suffix;
        if (capitalized_label(label)) word[0] = static_cast<char>(word[0] - 'a' + 'A');
        if (used.insert(word).second) cell.push_back(word);
      }
    }
  }
  return spec;
}

LangMap generator_lang_map(const GeneratorSpec& spec) {
  LangMap m = LangMap::defaults();
  m.set(spec.matrix_tag, LangClass::Matrix);
  m.set(spec.embedded_tag, LangClass::Embedded);
  m.set(spec.neutral_tag, LangClass::Neutral);
  return m;
}

// ---------------------------------------------------------------------------
// Generation

Corpus generate(const GeneratorSpec& spec) {
  spec.validate();
  if (spec.n_sentences == 0) throw Error(ErrorCode::EmptyCorpus, "n_sentences must be positive");

  std::map<LangClass, std::vector<double>> label_cdf;
  for (const auto& [lang, dist] : spec.label_weights) label_cdf[lang] = cumulative_of(dist);
  std::map<std::pair<LangClass, std::string>, std::vector<double>> word_cdf;
  for (const auto& [cell, words] : spec.vocab) word_cdf[cell] = zipf_cumulative(words.size(), spec.zipf);

  auto tag_of = [&](LangClass c) -> const std::string& {
    return c == LangClass::Matrix ? spec.matrix_tag : c == LangClass::Embedded ? spec.embedded_tag : spec.neutral_tag;
  };
  auto word_for = [&](Rng& rng, LangClass lang, const std::string& label) {
    const auto& words = spec.vocab.at({lang, label});
    return words[draw_weighted(rng, word_cdf.at({lang, label}))];
  };

  Rng rng(spec.seed);
  std::vector<Sentence> sentences;
  sentences.reserve(spec.n_sentences);
  for (std::size_t n = 0; n < spec.n_sentences; ++n) {
    Sentence s;
    s.id = "synth:" + std::to_string(n + 1);
    const std::size_t len = spec.min_len + rng.uniform_index(spec.max_len - spec.min_len + 1);
    LangClass state = spec.start == StartLanguage::Matrix ? LangClass::Matrix : LangClass::Embedded;
    bool first_in_chain = true;
    std::string prev_label;
    for (std::size_t i = 0; i < len; ++i) {
      Token t;
      if (spec.p_neutral > 0.0 && rng.bernoulli(spec.p_neutral)) {
        const auto& dist = spec.label_weights.at(LangClass::Neutral);
        t.label = dist[draw_weighted(rng, label_cdf.at(LangClass::Neutral))].first;
        t.surface = word_for(rng, LangClass::Neutral, t.label);
        t.lang = {LangClass::Neutral, spec.neutral_tag};
      } else {
        if (!first_in_chain) {
          const double p = state == LangClass::Matrix ? spec.p_en_to_x : spec.p_x_to_en;
          if (rng.bernoulli(p)) state = state == LangClass::Matrix ? LangClass::Embedded : LangClass::Matrix;
        }
        first_in_chain = false;
        if (spec.task == Task::Ner && (bio::is_begin(prev_label) || bio::is_inside(prev_label)) &&
            rng.bernoulli(spec.ner_continue)) {
          t.label = "I-" + std::string(bio::type_of(prev_label));
        } else {
          const auto& dist = spec.label_weights.at(state);
          t.label = dist[draw_weighted(rng, label_cdf.at(state))].first;
        }
        t.surface = word_for(rng, state, t.label);
        t.lang = {state, tag_of(state)};
      }
      prev_label = t.label;
      s.tokens.push_back(std::move(t));
    }
    sentences.push_back(std::move(s));
  }
  std::vector<std::string> header = {"generator = cstag-synth", "spec_digest = " + spec.digest(),
                                     "seed = " + std::to_string(spec.seed)};
  return Corpus(spec.task, std::move(sentences), std::move(header));
}

// ---------------------------------------------------------------------------
// Corruption

Corpus corrupt(const Corpus& corpus, const CorruptionSpec& spec, std::uint64_t seed, const SwitchOptions& options) {
  if (!(spec.p_corrupt >= 0.0 && spec.p_corrupt <= 1.0))
    throw Error(ErrorCode::InvalidSpec, "p_corrupt must lie in [0, 1]");
  if (!corpus.is_labeled()) throw Error(ErrorCode::UnlabeledGold, "cannot corrupt an unlabeled corpus");
  const std::vector<std::string> alphabet(corpus.label_alphabet().begin(), corpus.label_alphabet().end());

  Rng rng(seed);
  std::vector<Sentence> out = corpus.sentences();
  for (auto& s : out) {
    const auto points = detect_switch_points(s, options);
    std::vector<std::size_t> targets;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (points[k].direction != spec.target) continue;
      if (spec.scope == CorruptionScope::SwitchTokenOnly) {
        targets.push_back(points[k].token_index);
        continue;
      }
      const std::size_t end = k + 1 < points.size() ? points[k + 1].token_index : s.size();
      for (std::size_t i = points[k].token_index; i < end; ++i)
        if (s.tokens[i].lang.cls != LangClass::Neutral) targets.push_back(i);
    }
    for (std::size_t i : targets) {
      if (!rng.bernoulli(spec.p_corrupt)) continue;
      const std::string& current = s.tokens[i].label;
      std::vector<const std::string*> candidates;
      for (const auto& label : alphabet) {
        if (label == current) continue;
        if (corpus.task() == Task::Ner) {
          std::string_view prev = i == 0 ? std::string_view{} : std::string_view(s.tokens[i - 1].label);
          if (!bio::may_follow(prev, label)) continue;
          if (i + 1 < s.size() && !bio::may_follow(label, s.tokens[i + 1].label)) continue;
        }
        candidates.push_back(&label);
      }
      if (candidates.empty()) continue;
      s.tokens[i].label = *candidates[rng.uniform_index(candidates.size())];
    }
  }
  return Corpus(corpus.task(), std::move(out), corpus.header());
}

}  // namespace cstag
