#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>

#include "cstag/rng.hpp"
#include "cstag/synth.hpp"
#include "cstag/tagger.hpp"
#include "test_util.hpp"

using namespace cstag;
using cstag::testing::data_path;
using cstag::testing::sentence;

namespace {

Corpus pos_fixture() { return parse_corpus(data_path("pos_gold.tsv"), Task::Pos, LangMap::defaults()); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no cstag::Error thrown";
  return ErrorCode::IoError;
}

// Score of one internal label sequence under the averaged weights.
double sequence_score(const TaggerModel& m, const Sentence& s, const std::vector<std::string>& labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::string prev = i == 0 ? std::string(kStartLabel) : labels[i - 1];
    for (const auto& k : extract_features(s, i, prev, m.mode(), m.templates())) total += m.weight(k, labels[i]);
  }
  return total;
}

// Best sequence score by enumerating every labeling.
double brute_force(const TaggerModel& m, const Sentence& s) {
  const std::size_t l = m.labels().size();
  std::vector<std::size_t> idx(s.size(), 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<std::string> labels;
    for (auto y : idx) labels.push_back(m.labels()[y]);
    best = std::max(best, sequence_score(m, s, labels));
    std::size_t pos = s.size();
    while (pos > 0) {
      --pos;
      if (++idx[pos] < l) break;
      idx[pos] = 0;
      if (pos == 0) return best;
    }
  }
}

}  // namespace

TEST(Tagger, AveragedWeightsAreTheMeanOverAllSteps) {
  const Corpus c = pos_fixture();
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.seed = 3;
  const FeatureKey word{FeatureTemplate::Word, "khana"};
  const FeatureKey shape{FeatureTemplate::Shape, "xxxx"};
  const FeatureKey start{FeatureTemplate::PrevLabel, std::string(kStartLabel)};
  const std::vector<std::pair<FeatureKey, std::string>> probes = {
      {word, "NOUN"}, {word, "VERB"}, {shape, "ADJ"}, {shape, "NOUN"}, {start, "PRON"}, {start, "DET"}};
  std::vector<double> sums(probes.size(), 0.0);
  std::size_t steps = 0;
  const auto model = train(c, cfg, TaggerMode::Plain, [&](const TaggerModel& m) {
    ++steps;
    for (std::size_t i = 0; i < probes.size(); ++i) sums[i] += m.raw_weight(probes[i].first, probes[i].second);
  });
  ASSERT_EQ(steps, 12u);
  EXPECT_EQ(model.updates_seen(), 12u);
  bool any_nonzero = false;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    EXPECT_DOUBLE_EQ(model.weight(probes[i].first, probes[i].second), sums[i] / 12.0) << i;
    any_nonzero = any_nonzero || sums[i] != 0.0;
  }
  EXPECT_TRUE(any_nonzero);
}

TEST(Tagger, AveragingContinuesAcrossFineTuning) {
  const Corpus c = pos_fixture();
  TrainConfig cfg;
  cfg.epochs = 2;
  const FeatureKey word{FeatureTemplate::Word, "went"};
  double sum = 0.0;
  auto observe = [&](const TaggerModel& m) { sum += m.raw_weight(word, "VERB"); };
  auto m = train(c, cfg, TaggerMode::Plain, observe);
  m = fine_tune(m, c, cfg, TaggerMode::Plain, observe);
  EXPECT_EQ(m.updates_seen(), 12u);
  EXPECT_DOUBLE_EQ(m.weight(word, "VERB"), sum / 12.0);
}

TEST(Tagger, FineTuneOfFreshModelEqualsTrain) {
  const Corpus c = pos_fixture();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 9;
  EXPECT_EQ(train(c, cfg, TaggerMode::Plain), fine_tune(TaggerModel(Task::Pos, TaggerMode::Plain), c, cfg));
}

TEST(Tagger, ViterbiMatchesExhaustiveSearch) {
  Rng rng(77);
  const std::vector<std::string> labels = {"A", "B", "C"};
  for (int trial = 0; trial < 60; ++trial) {
    TaggerModel m(Task::Pos, TaggerMode::Plain);
    for (const auto& l : labels) m.add_label(l);
    Sentence s;
    s.id = "t";
    const std::size_t n = 1 + rng.uniform_index(5);
    for (std::size_t i = 0; i < n; ++i)
      s.tokens.push_back({"w" + std::to_string(rng.uniform_index(3)), "A", {LangClass::Matrix, "en"}});
    for (int w = 0; w < 3; ++w)
      for (const auto& l : labels)
        m.set_weight({FeatureTemplate::Word, "w" + std::to_string(w)}, l,
                     static_cast<double>(static_cast<int>(rng.uniform_index(9)) - 4));
    for (const auto& p : {std::string(kStartLabel), std::string("A"), std::string("B"), std::string("C")})
      for (const auto& l : labels)
        m.set_weight({FeatureTemplate::PrevLabel, p}, l, static_cast<double>(static_cast<int>(rng.uniform_index(9)) - 4));
    // Integer weights make the sums exact.
    EXPECT_EQ(sequence_score(m, s, viterbi_decode(m, s)), brute_force(m, s)) << "trial " << trial;
  }
}

TEST(Tagger, TiesGoToTheFirstLabel) {
  TaggerModel m(Task::Pos, TaggerMode::Plain);
  m.add_label("Z");
  m.add_label("A");
  const auto s = sentence("x", "a/Z/en b/Z/en c/Z/en");
  EXPECT_EQ(viterbi_decode(m, s), (std::vector<std::string>{"Z", "Z", "Z"}));
}

TEST(Tagger, TransitionsIgnoredWithoutPrevLabelTemplate) {
  TemplateSet t = all_templates();
  t.reset(static_cast<std::size_t>(FeatureTemplate::PrevLabel));
  TaggerModel m(Task::Pos, TaggerMode::Plain, t);
  m.add_label("A");
  m.add_label("B");
  m.set_weight({FeatureTemplate::PrevLabel, std::string(kStartLabel)}, "B", 10.0);
  EXPECT_EQ(viterbi_decode(m, sentence("x", "q/A/en")), (std::vector<std::string>{"A"}));
}

TEST(Tagger, LearnsFixtureAndIsDeterministic) {
  const Corpus c = pos_fixture();
  TrainConfig cfg;
  cfg.seed = 5;
  const auto a = train(c, cfg, TaggerMode::Plain);
  const auto b = train(c, cfg, TaggerMode::Plain);
  EXPECT_EQ(a, b);
  EXPECT_EQ(predict(a, c), c);
}

TEST(Tagger, LangOutputUsesJointLabelsAndProjects) {
  const Corpus c = pos_fixture();
  const auto m = train(c, {}, TaggerMode::LangOutput);
  EXPECT_TRUE(m.label_index(joint_label("NOUN", "hi")).has_value());
  EXPECT_TRUE(m.label_index(joint_label("NOUN", "en")).has_value());
  EXPECT_FALSE(m.label_index("NOUN").has_value());
  EXPECT_EQ(project_label(joint_label("NOUN", "hi")), "NOUN");
  EXPECT_EQ(project_label("NOUN"), "NOUN");
  EXPECT_EQ(predict(m, c), c);
}

TEST(Tagger, LangInputLearnsFixture) {
  const Corpus c = pos_fixture();
  const auto m = train(c, {}, TaggerMode::LangInput);
  EXPECT_GT(m.weight({FeatureTemplate::LangTag, "univ"}, "PUNCT"), 0.0);
  EXPECT_EQ(predict(m, c), c);
}

TEST(Tagger, NerPredictionsAreBioValid) {
  const Corpus c = parse_corpus(data_path("ner_gold.tsv"), Task::Ner, LangMap::defaults());
  TaggerModel m(Task::Ner, TaggerMode::Plain);
  m.add_label("O");
  m.add_label("I-PER");
  m.set_weight({FeatureTemplate::Word, "rahul"}, "I-PER", 5.0);
  const auto pred = predict(m, c);
  for (const auto& s : pred) EXPECT_EQ(bio::first_violation(labels_of(s)), s.size());
  EXPECT_EQ(pred[0].tokens[0].label, "B-PER");
}

TEST(Tagger, Errors) {
  const Corpus c = pos_fixture();
  EXPECT_EQ(code_of([&] { viterbi_decode(TaggerModel(), c[0]); }), ErrorCode::EmptyModel);
  EXPECT_EQ(code_of([&] { predict(TaggerModel(), c); }), ErrorCode::EmptyModel);
  EXPECT_EQ(code_of([&] { train(strip_labels(c), {}, TaggerMode::Plain); }), ErrorCode::UnlabeledGold);
  TrainConfig bad;
  bad.epochs = 0;
  EXPECT_EQ(code_of([&] { train(c, bad, TaggerMode::Plain); }), ErrorCode::InvalidConfig);
  const auto m = train(c, {}, TaggerMode::Plain);
  EXPECT_EQ(code_of([&] { fine_tune(m, c, {}, TaggerMode::LangInput); }), ErrorCode::ModeMismatch);
  const Corpus ner = parse_corpus(data_path("ner_gold.tsv"), Task::Ner, LangMap::defaults());
  EXPECT_EQ(code_of([&] { fine_tune(m, ner, {}); }), ErrorCode::TaskMismatch);
  EXPECT_EQ(code_of([&] { predict(m, ner); }), ErrorCode::TaskMismatch);
  TaggerModel empty(Task::Pos, TaggerMode::Plain);
  EXPECT_EQ(code_of([&] { empty.set_weight({FeatureTemplate::Word, "a"}, "X", 1.0); }), ErrorCode::InvalidConfig);
}

TEST(Tagger, ModelRoundTripsThroughBothEncodings) {
  const Corpus c = pos_fixture();
  const auto m = train(c, {}, TaggerMode::LangOutput);
  EXPECT_EQ(decode_model(encode_model(m)), m);
  const std::string text = encode_model_json(m);
  EXPECT_EQ(decode_model(std::vector<std::uint8_t>(text.begin(), text.end())), m);

  const auto dir = std::filesystem::temp_directory_path() / "cstag_tagger_test";
  std::filesystem::create_directories(dir);
  save_model(m, dir / "m.bin");
  save_model(m, dir / "m.json");
  const auto from_bin = load_model(dir / "m.bin");
  const auto from_json = load_model(dir / "m.json");
  EXPECT_EQ(from_bin, m);
  EXPECT_EQ(from_json, m);
  EXPECT_EQ(predict(from_bin, c), predict(m, c));
  std::filesystem::remove_all(dir);
}

TEST(Tagger, CorruptOrForeignModelFiles) {
  const std::string junk = "{\"hello\": 1}";
  EXPECT_EQ(code_of([&] { decode_model(std::vector<std::uint8_t>(junk.begin(), junk.end())); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([&] { decode_model({0xff, 0x00, 0x13}); }), ErrorCode::ParseError);
  auto j = nlohmann::json::parse(encode_model_json(train(pos_fixture(), {}, TaggerMode::Plain)));
  j["format_version"] = kModelFormatVersion + 1;
  const std::string text = j.dump();
  EXPECT_EQ(code_of([&] { decode_model(std::vector<std::uint8_t>(text.begin(), text.end())); }),
            ErrorCode::VersionMismatch);
}

TEST(Tagger, ReachesHighAccuracyOnEasySyntheticData) {
  GeneratorSpec spec = default_generator_spec(Task::Pos);
  spec.n_sentences = 600;
  spec.seed = 4;
  const Corpus c = generate(spec);
  const Corpus train_part = prefix(c, 500);
  const Corpus dev = select_sentences(c, [] {
    std::vector<std::size_t> v;
    for (std::size_t i = 500; i < 600; ++i) v.push_back(i);
    return v;
  }());
  TrainConfig cfg;
  cfg.epochs = 5;
  const auto pred = predict(train(train_part, cfg, TaggerMode::Plain), dev);
  std::size_t correct = 0, total = 0;
  for (std::size_t s = 0; s < dev.size(); ++s)
    for (std::size_t t = 0; t < dev[s].size(); ++t) {
      ++total;
      correct += dev[s].tokens[t].label == pred[s].tokens[t].label;
    }
  EXPECT_GT(static_cast<double>(correct) / static_cast<double>(total), 0.95);
}
