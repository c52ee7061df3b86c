#include <gtest/gtest.h>

#include <set>

#include "cstag/bench.hpp"
#include "test_util.hpp"

using namespace cstag;

namespace {

SyntheticBenchOptions tiny() {
  SyntheticBenchOptions o;
  o.n_labeled = 150;
  o.n_dev = 80;
  o.n_test = 80;
  o.n_unlabeled = 300;
  return o;
}

SelfTrainConfig quick() {
  SelfTrainConfig c;
  c.batch_size = 50;
  c.max_iterations = 2;
  c.annotator_epochs = 2;
  c.end_epochs = 2;
  c.min_biased_seed = 5;
  return c;
}

}  // namespace

TEST(Bench, SyntheticSlicesHaveRequestedShape) {
  const auto o = tiny();
  const auto d = make_synthetic_bench(o);
  EXPECT_EQ(d.labeled.size(), o.n_labeled);
  EXPECT_EQ(d.dev.size(), o.n_dev);
  EXPECT_EQ(d.test.size(), o.n_test);
  EXPECT_EQ(d.unlabeled.size(), o.n_unlabeled);
  EXPECT_TRUE(d.unlabeled.is_unlabeled());
  EXPECT_TRUE(d.dev.is_labeled());
  // Only the labeled slice is corrupted, and only at en->X switch tokens.
  auto clean = o;
  clean.corruption.p_corrupt = 0.0;
  const auto c = make_synthetic_bench(clean);
  EXPECT_EQ(c.dev, d.dev);
  EXPECT_EQ(c.test, d.test);
  EXPECT_FALSE(c.labeled == d.labeled);
  for (std::size_t s = 0; s < c.labeled.size(); ++s) {
    std::set<std::size_t> en2x;
    for (const auto& p : detect_switch_points(c.labeled[s]))
      if (p.direction == SwitchDirection::EnToX) en2x.insert(p.token_index);
    for (std::size_t t = 0; t < c.labeled[s].size(); ++t)
      if (c.labeled[s].tokens[t].label != d.labeled[s].tokens[t].label) {
        EXPECT_TRUE(en2x.count(t));
      }
  }
}

TEST(Bench, SingleSeedReportShape) {
  const auto d = make_synthetic_bench(tiny());
  const auto cfg = quick();
  const auto rep = run_bench(d.labeled, d.dev, d.test, d.unlabeled, cfg, 2);
  ASSERT_EQ(rep.seeds.size(), 2u);
  EXPECT_EQ(rep.seeds[0].seed, cfg.seed);
  EXPECT_EQ(rep.seeds[1].seed, cfg.seed + 1);
  for (const auto& s : rep.seeds) EXPECT_LE(s.schedule.size(), cfg.max_iterations);
  const double mean_acc = (rep.seeds[0].selftr.overall_acc + rep.seeds[1].selftr.overall_acc) / 2.0;
  EXPECT_NEAR(rep.mean_selftr.overall_acc, mean_acc, 1e-12);
  EXPECT_NEAR(rep.acc_delta, rep.mean_selftr.overall_acc - rep.mean_random.overall_acc, 1e-12);
  ASSERT_TRUE(rep.gap_delta);
  EXPECT_NEAR(*rep.gap_delta, *rep.mean_selftr.gap - *rep.mean_random.gap, 1e-12);
  std::size_t smaller = 0;
  for (const auto& s : rep.seeds) smaller += *s.selftr.gap() < *s.random.gap();
  EXPECT_EQ(rep.seeds_with_smaller_gap, smaller);
}

TEST(Bench, JsonAndTableAgree) {
  const auto d = make_synthetic_bench(tiny());
  const auto rep = run_bench(d.labeled, d.dev, d.test, d.unlabeled, quick(), 1);
  const auto j = to_json(rep);
  ASSERT_EQ(j["seeds"].size(), 1u);
  ASSERT_EQ(j["seeds"][0]["rows"].size(), 3u);
  EXPECT_EQ(j["mean"][1]["name"], "mean selfTr");
  const std::string table = format_bench_table(rep);
  const double acc = j["mean"][1]["overall"]["acc"].get<double>();
  EXPECT_NE(table.find(format_percent(acc)), std::string::npos);
  EXPECT_NE(table.find("seeds with smaller selfTr gap: " + std::to_string(rep.seeds_with_smaller_gap) + "/1"),
            std::string::npos);
}

TEST(Bench, Errors) {
  const auto d = make_synthetic_bench(tiny());
  EXPECT_THROW(run_bench(d.labeled, d.dev, d.test, d.unlabeled, quick(), 0), Error);
  EXPECT_THROW(run_bench(d.labeled, d.dev, Corpus(), d.unlabeled, quick(), 1), Error);
  const Corpus overlapping = concat(d.unlabeled, strip_labels(prefix(d.test, 1)));
  try {
    run_bench(d.labeled, d.dev, d.test, overlapping, quick(), 1);
    ADD_FAILURE() << "overlap with test accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OverlappingSentences);
  }
}
