#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cstag/bench.hpp"
#include "cstag/selftrain.hpp"
#include "test_util.hpp"

using namespace cstag;
using cstag::testing::lang_sentence;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no cstag::Error thrown";
  return ErrorCode::IoError;
}

Corpus corpus_of(std::initializer_list<std::pair<const char*, const char*>> items) {
  std::vector<Sentence> ss;
  for (const auto& [id, langs] : items) ss.push_back(lang_sentence(id, langs, "A"));
  return Corpus(Task::Pos, ss);
}

// Two-label model whose predictions are A everywhere except where a word
// feature pushes a surface to B.
TaggerModel forcing_model(const std::vector<std::string>& wrong_surfaces) {
  TaggerModel m(Task::Pos, TaggerMode::Plain);
  m.add_label("A");
  m.add_label("B");
  for (const auto& w : wrong_surfaces) m.set_weight({FeatureTemplate::Word, w}, "B", 1.0);
  return m;
}

std::vector<std::string> ids_of(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& s : c) out.push_back(s.id);
  return out;
}

BenchData small_bench(std::uint64_t seed = 7) {
  SyntheticBenchOptions o;
  o.n_labeled = 200;
  o.n_dev = 120;
  o.n_test = 120;
  o.n_unlabeled = 600;
  o.seed = seed;
  return make_synthetic_bench(o);
}

SelfTrainConfig small_config() {
  SelfTrainConfig c;
  c.batch_size = 60;
  c.max_iterations = 3;
  c.patience = 3;
  c.annotator_epochs = 2;
  c.end_epochs = 2;
  c.min_biased_seed = 10;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(BiasDirection, PerformanceBasedPicksTheWeakerDirection) {
  // "mem": EnToX at w1, XToEn at w2.
  const Corpus dev = corpus_of({{"d1", "mem"}});
  const Corpus none;
  EXPECT_EQ(select_bias_direction(forcing_model({"w1"}), dev, BiasMode::PerformanceBased, none),
            SwitchDirection::EnToX);
  EXPECT_EQ(select_bias_direction(forcing_model({"w2"}), dev, BiasMode::PerformanceBased, none),
            SwitchDirection::XToEn);
  // Full tie on F1 and accuracy.
  EXPECT_EQ(select_bias_direction(forcing_model({}), dev, BiasMode::PerformanceBased, none), SwitchDirection::EnToX);
  EXPECT_EQ(select_bias_direction(forcing_model({"w1", "w2"}), dev, BiasMode::PerformanceBased, none),
            SwitchDirection::EnToX);
}

TEST(BiasDirection, SingleDirectionInDev) {
  const Corpus none;
  EXPECT_EQ(select_bias_direction(forcing_model({}), corpus_of({{"d", "em"}}), BiasMode::PerformanceBased, none),
            SwitchDirection::XToEn);
  EXPECT_EQ(select_bias_direction(forcing_model({}), corpus_of({{"d", "me"}}), BiasMode::PerformanceBased, none),
            SwitchDirection::EnToX);
}

TEST(BiasDirection, RatioBased) {
  const auto m = forcing_model({});
  const Corpus dev = corpus_of({{"d", "mm"}});
  // a = 1, b = 3.
  EXPECT_EQ(select_bias_direction(m, dev, BiasMode::RatioBased, corpus_of({{"u1", "emem"}, {"u2", "em"}})),
            SwitchDirection::EnToX);
  EXPECT_EQ(select_bias_direction(m, dev, BiasMode::RatioBased, corpus_of({{"u1", "mem"}})), SwitchDirection::XToEn);
  EXPECT_EQ(select_bias_direction(m, dev, BiasMode::RatioBased, corpus_of({{"u1", "me"}})), SwitchDirection::XToEn);
  EXPECT_EQ(code_of([&] { select_bias_direction(m, dev, BiasMode::RatioBased, corpus_of({{"u", "mm"}})); }),
            ErrorCode::NoSwitchPoints);
}

TEST(BiasDirection, AutoFallsBackToRatioWithoutDevSwitches) {
  const auto m = forcing_model({});
  const Corpus dev = corpus_of({{"d", "mmm"}});
  const Corpus pool = corpus_of({{"u1", "em"}});
  EXPECT_EQ(select_bias_direction(m, dev, BiasMode::Auto, pool), SwitchDirection::EnToX);
  EXPECT_EQ(code_of([&] { select_bias_direction(m, dev, BiasMode::PerformanceBased, pool); }),
            ErrorCode::NoSwitchPoints);
}

TEST(Subsample, BiasedKeepsOnlyFavoringSentences) {
  // (a, b): meme (2,1), mem (1,1), em (0,1).
  const Corpus pool = corpus_of({{"p1", "meme"}, {"p2", "mem"}, {"p3", "em"}, {"p4", "meme"}});
  EXPECT_EQ(ids_of(subsample_biased(pool, SwitchDirection::EnToX, 10, 1)), (std::vector<std::string>{"p1", "p4"}));
  EXPECT_EQ(ids_of(subsample_biased(pool, SwitchDirection::XToEn, 10, 1)), (std::vector<std::string>{"p3"}));
  const auto one = subsample_biased(pool, SwitchDirection::EnToX, 1, 5);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_TRUE(one[0].id == "p1" || one[0].id == "p4");
  EXPECT_EQ(code_of([&] { subsample_biased(corpus_of({{"p", "mem"}}), SwitchDirection::EnToX, 3, 1); }),
            ErrorCode::NoEligibleSentences);
}

TEST(Subsample, RandomIsUniformSizeAndDeterministic) {
  const Corpus pool = corpus_of({{"p1", "m"}, {"p2", "m"}, {"p3", "m"}, {"p4", "m"}, {"p5", "m"}});
  const auto a = subsample_random(pool, 3, 9);
  EXPECT_EQ(a.size(), 3u);
  EXPECT_EQ(ids_of(a), ids_of(subsample_random(pool, 3, 9)));
  EXPECT_EQ(subsample_random(pool, 50, 9).size(), 5u);
  EXPECT_EQ(code_of([] { subsample_random(Corpus(), 3, 9); }), ErrorCode::EmptyPool);
}

TEST(SelfTrain, ConfigValidation) {
  SelfTrainConfig c;
  c.batch_size = 0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidConfig);
  c = {};
  c.patience = 0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(parse_bias_mode("ratio"), BiasMode::RatioBased);
  EXPECT_EQ(code_of([] { parse_bias_mode("fast"); }), ErrorCode::InvalidConfig);
}

TEST(SelfTrain, EmptyPoolReturnsInitialModel) {
  const auto d = small_bench();
  const auto r = self_train(d.labeled, d.dev, Corpus(), small_config());
  EXPECT_EQ(r.stop_reason, "empty pool");
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.best_iteration, 0u);
  EXPECT_EQ(r.augmented_corpus, d.labeled);
  EXPECT_EQ(r.best_model, r.initial_model);
}

TEST(SelfTrain, InputErrors) {
  const auto d = small_bench();
  const auto cfg = small_config();
  EXPECT_EQ(code_of([&] { self_train(Corpus(), d.dev, d.unlabeled, cfg); }), ErrorCode::EmptyCorpus);
  EXPECT_EQ(code_of([&] { self_train(d.labeled, strip_labels(d.dev), d.unlabeled, cfg); }), ErrorCode::UnlabeledGold);
  const Corpus overlapping = concat(d.unlabeled, strip_labels(prefix(d.dev, 2)));
  EXPECT_EQ(code_of([&] { self_train(d.labeled, d.dev, overlapping, cfg); }), ErrorCode::OverlappingSentences);
  auto allowed = cfg;
  allowed.allow_overlap = true;
  allowed.max_iterations = 1;
  EXPECT_NO_THROW(self_train(d.labeled, d.dev, overlapping, allowed));
  const Corpus dup = concat(d.unlabeled, prefix(d.unlabeled, 1));
  EXPECT_EQ(code_of([&] { self_train(d.labeled, d.dev, dup, cfg); }), ErrorCode::DuplicateSentenceId);
}

TEST(SelfTrain, HistoryInvariants) {
  const auto d = small_bench();
  const auto cfg = small_config();
  const auto r = self_train(d.labeled, d.dev, d.unlabeled, cfg);
  ASSERT_FALSE(r.history.empty());
  EXPECT_LE(r.history.size(), cfg.max_iterations);

  std::set<std::string> pool_ids;
  for (const auto& s : d.unlabeled) pool_ids.insert(s.id);
  std::set<std::string> seen;
  std::size_t running = 0;
  for (std::size_t i = 0; i < r.history.size(); ++i) {
    const auto& rec = r.history[i];
    EXPECT_EQ(rec.iteration, i + 1);
    ASSERT_TRUE(rec.bias_direction);
    EXPECT_LE(rec.n_added, cfg.batch_size);
    EXPECT_EQ(rec.added_ids.size(), rec.n_added);
    running += rec.n_added;
    EXPECT_EQ(rec.cumulative_augmented, running);
    for (const auto& id : rec.added_ids) {
      EXPECT_TRUE(pool_ids.count(id)) << id;
      EXPECT_TRUE(seen.insert(id).second) << "sentence reused: " << id;
    }
    // Every added sentence favors the chosen direction.
    for (const auto& s : d.unlabeled)
      if (std::find(rec.added_ids.begin(), rec.added_ids.end(), s.id) != rec.added_ids.end()) {
        EXPECT_TRUE(sentence_stats(s).favors(*rec.bias_direction)) << s.id;
      }
  }

  // Best iteration is the first strict maximum, initial model included.
  double best = r.initial_dev_report.headline();
  std::size_t best_iter = 0;
  for (const auto& rec : r.history)
    if (rec.dev_report.headline() > best) {
      best = rec.dev_report.headline();
      best_iter = rec.iteration;
    }
  EXPECT_EQ(r.best_iteration, best_iter);
  EXPECT_DOUBLE_EQ(r.best_metric(), best);

  // Augmented corpus: labeled data plus weak sentences up to the best iteration.
  std::size_t expected_weak = r.best_iteration == 0 ? 0 : r.history[r.best_iteration - 1].cumulative_augmented;
  ASSERT_EQ(r.augmented_corpus.size(), d.labeled.size() + expected_weak);
  for (std::size_t i = 0; i < r.augmented_corpus.size(); ++i)
    EXPECT_EQ(r.augmented_corpus[i].weak, i >= d.labeled.size());
}

TEST(SelfTrain, PatienceStopsTheLoop) {
  const auto d = small_bench(11);
  auto cfg = small_config();
  cfg.max_iterations = 6;
  cfg.patience = 1;
  cfg.batch_size = 40;
  const auto r = self_train(d.labeled, d.dev, d.unlabeled, cfg);
  if (r.stop_reason == "dev metric stopped improving")
    EXPECT_EQ(r.history.size() - r.best_iteration, cfg.patience);
  else
    EXPECT_TRUE(r.history.size() == cfg.max_iterations || r.stop_reason != "max iterations");
  // No iteration after the best one improved on it within the window.
  for (std::size_t i = r.best_iteration; i < r.history.size(); ++i)
    EXPECT_LE(r.history[i].dev_report.headline(), r.best_metric());
}

TEST(SelfTrain, DeterministicForFixedSeed) {
  const auto d = small_bench();
  const auto cfg = small_config();
  const auto a = self_train(d.labeled, d.dev, d.unlabeled, cfg);
  const auto b = self_train(d.labeled, d.dev, d.unlabeled, cfg);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(a.best_model, b.best_model);
}

TEST(SelfTrain, FixedDirectionIsHonoured) {
  const auto d = small_bench();
  auto cfg = small_config();
  cfg.fix_direction = SwitchDirection::XToEn;
  cfg.max_iterations = 2;
  const auto r = self_train(d.labeled, d.dev, d.unlabeled, cfg);
  for (const auto& rec : r.history) EXPECT_EQ(rec.bias_direction, SwitchDirection::XToEn);
}

TEST(SelfTrain, LatestOnlyTrainsOnTheLastBatch) {
  const auto d = small_bench();
  auto cfg = small_config();
  cfg.latest_only = true;
  cfg.patience = 5;
  const auto r = self_train(d.labeled, d.dev, d.unlabeled, cfg);
  const std::size_t expected_weak = r.best_iteration == 0 ? 0 : r.history[r.best_iteration - 1].n_added;
  EXPECT_EQ(r.augmented_corpus.size(), d.labeled.size() + expected_weak);
}

TEST(RandomBaseline, FollowsTheGivenSchedule) {
  const auto d = small_bench();
  const std::vector<std::size_t> schedule = {30, 20, 10};
  const auto r = random_baseline(d.labeled, d.dev, d.unlabeled, small_config(), schedule);
  EXPECT_EQ(batch_schedule(r), schedule);
  for (const auto& rec : r.history) EXPECT_FALSE(rec.bias_direction.has_value());
}

TEST(RandomBaseline, SymmetricControlMatchesBiased) {
  // No corruption and symmetric switching: biasing toward one direction
  // should neither help nor hurt the gap by much.
  double st_gap = 0.0, rnd_gap = 0.0;
  const std::size_t seeds = 5;
  for (std::size_t k = 0; k < seeds; ++k) {
    SyntheticBenchOptions o;
    o.n_labeled = 300;
    o.n_dev = 150;
    o.n_test = 300;
    o.n_unlabeled = 600;
    o.p_en_to_x = 0.3;
    o.p_x_to_en = 0.3;
    o.corruption.p_corrupt = 0.0;
    o.seed = 100 + k;
    const auto d = make_synthetic_bench(o);
    auto cfg = small_config();
    cfg.seed = k;
    const auto rep = run_bench(d.labeled, d.dev, d.test, d.unlabeled, cfg, 1);
    st_gap += *rep.mean_selftr.gap;
    rnd_gap += *rep.mean_random.gap;
  }
  EXPECT_LT(std::abs(st_gap - rnd_gap) / seeds, 0.02);
}
