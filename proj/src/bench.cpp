#include "cstag/bench.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "cstag/rng.hpp"

namespace cstag {

namespace {

std::optional<double> opt(const std::optional<DirectionScores>& d, double DirectionScores::*field) {
  if (!d) return std::nullopt;
  return (*d).*field;
}

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(std::optional<double> v) {
    if (!v) return;
    sum += *v;
    ++n;
  }
  std::optional<double> get() const { return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt; }
};

BenchRow mean_row(const std::string& name, const std::vector<BenchRow>& rows) {
  Mean acc, f1, xa, xf, ea, ef, gap;
  for (const auto& r : rows) {
    acc.add(r.overall_acc);
    f1.add(r.overall_f1);
    xa.add(r.x2en_acc);
    xf.add(r.x2en_f1);
    ea.add(r.en2x_acc);
    ef.add(r.en2x_f1);
    gap.add(r.gap);
  }
  BenchRow m;
  m.name = name;
  m.overall_acc = acc.get().value_or(0.0);
  m.overall_f1 = f1.get().value_or(0.0);
  m.x2en_acc = xa.get();
  m.x2en_f1 = xf.get();
  m.en2x_acc = ea.get();
  m.en2x_f1 = ef.get();
  m.gap = gap.get();
  return m;
}

nlohmann::json row_json(const BenchRow& r) {
  auto v = [](std::optional<double> x) { return x ? nlohmann::json(*x) : nlohmann::json(nullptr); };
  return {{"name", r.name},
          {"overall", {{"acc", r.overall_acc}, {"f1", r.overall_f1}}},
          {"x2en", {{"acc", v(r.x2en_acc)}, {"f1", v(r.x2en_f1)}}},
          {"en2x", {{"acc", v(r.en2x_acc)}, {"f1", v(r.en2x_f1)}}},
          {"gap", v(r.gap)}};
}

std::vector<double> dev_metrics(const SelfTrainResult& r) {
  std::vector<double> out = {r.initial_dev_report.headline()};
  for (const auto& rec : r.history) out.push_back(rec.dev_report.headline());
  return out;
}

std::vector<BenchRow> seed_rows(const SeedResult& s) {
  const std::string prefix = "seed " + std::to_string(s.seed) + " ";
  return {bench_row(prefix + "baseline", s.baseline), bench_row(prefix + "selfTr", s.selftr),
          bench_row(prefix + "random", s.random)};
}

}  // namespace

BenchData make_synthetic_bench(const SyntheticBenchOptions& o) {
  auto spec = default_generator_spec(o.task, o.vocab);
  spec.p_en_to_x = o.p_en_to_x;
  spec.p_x_to_en = o.p_x_to_en;
  spec.p_neutral = o.p_neutral;
  spec.min_len = o.min_len;
  spec.max_len = o.max_len;
  spec.zipf = o.zipf;
  spec.seed = o.seed;
  spec.n_sentences = o.n_labeled + o.n_dev + o.n_test + o.n_unlabeled;
  const Corpus all = generate(spec);

  auto slice = [&](std::size_t begin, std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = begin + i;
    return select_sentences(all, idx);
  };
  BenchData d;
  std::size_t at = 0;
  d.labeled = corrupt(slice(at, o.n_labeled), o.corruption, derive_seed(o.seed, 99));
  at += o.n_labeled;
  d.dev = slice(at, o.n_dev);
  at += o.n_dev;
  d.test = slice(at, o.n_test);
  at += o.n_test;
  d.unlabeled = strip_labels(slice(at, o.n_unlabeled));
  return d;
}

BenchRow bench_row(const std::string& name, const EvalReport& r) {
  BenchRow row;
  row.name = name;
  row.overall_acc = r.overall_acc;
  row.overall_f1 = r.task == Task::Ner && r.chunk_f1 ? *r.chunk_f1 : r.overall_f1;
  const auto x2en = r.direction(SwitchDirection::XToEn);
  const auto en2x = r.direction(SwitchDirection::EnToX);
  row.x2en_acc = opt(x2en, &DirectionScores::acc);
  row.x2en_f1 = opt(x2en, &DirectionScores::f1);
  row.en2x_acc = opt(en2x, &DirectionScores::acc);
  row.en2x_f1 = opt(en2x, &DirectionScores::f1);
  row.gap = r.gap();
  return row;
}

BenchReport run_bench(const Corpus& labeled, const Corpus& dev, const Corpus& test, const Corpus& unlabeled,
                      const SelfTrainConfig& config, std::size_t n_seeds) {
  if (n_seeds < 1) throw Error(ErrorCode::InvalidConfig, "at least one seed is required");
  if (test.empty()) throw Error(ErrorCode::EmptyCorpus, "test corpus is empty");
  if (test.task() != labeled.task()) throw Error(ErrorCode::TaskMismatch, "test task differs from labeled task");
  if (!config.allow_overlap) {
    std::unordered_set<std::string> test_ids;
    for (const auto& s : test) test_ids.insert(s.id);
    for (const auto& s : unlabeled)
      if (test_ids.count(s.id))
        throw Error(ErrorCode::OverlappingSentences,
                    "sentence id '" + s.id + "' occurs in both the unlabeled pool and test");
  }
  const auto& sw = config.switch_options;

  BenchReport report;
  report.task = labeled.task();
  std::vector<BenchRow> base_rows, st_rows, rnd_rows;
  for (std::size_t k = 0; k < n_seeds; ++k) {
    SelfTrainConfig c = config;
    c.seed = config.seed + k;
    const auto st = self_train(labeled, dev, unlabeled, c);
    const auto schedule = batch_schedule(st);
    const auto rnd = random_baseline(labeled, dev, unlabeled, c, schedule);

    SeedResult s;
    s.seed = c.seed;
    s.baseline = switch_point_report(test, predict(st.initial_model, test), sw);
    s.selftr = switch_point_report(test, predict(st.best_model, test), sw);
    s.random = switch_point_report(test, predict(rnd.best_model, test), sw);
    s.schedule = schedule;
    s.selftr_best_iteration = st.best_iteration;
    s.random_best_iteration = rnd.best_iteration;
    s.selftr_stop_reason = st.stop_reason;
    s.selftr_dev_metrics = dev_metrics(st);
    s.random_dev_metrics = dev_metrics(rnd);

    auto rows = seed_rows(s);
    base_rows.push_back(rows[0]);
    st_rows.push_back(rows[1]);
    rnd_rows.push_back(rows[2]);
    if (rows[1].gap && rows[2].gap && *rows[1].gap < *rows[2].gap) ++report.seeds_with_smaller_gap;
    report.seeds.push_back(std::move(s));
  }
  report.mean_baseline = mean_row("mean baseline", base_rows);
  report.mean_selftr = mean_row("mean selfTr", st_rows);
  report.mean_random = mean_row("mean random", rnd_rows);
  if (report.mean_selftr.gap && report.mean_random.gap)
    report.gap_delta = *report.mean_selftr.gap - *report.mean_random.gap;
  report.acc_delta = report.mean_selftr.overall_acc - report.mean_random.overall_acc;
  return report;
}

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json j;
  j["task"] = to_string(report.task);
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : report.seeds) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : seed_rows(s)) rows.push_back(row_json(r));
    seeds.push_back({{"seed", s.seed},
                     {"schedule", s.schedule},
                     {"selftr_best_iteration", s.selftr_best_iteration},
                     {"random_best_iteration", s.random_best_iteration},
                     {"selftr_stop_reason", s.selftr_stop_reason},
                     {"selftr_dev_metrics", s.selftr_dev_metrics},
                     {"random_dev_metrics", s.random_dev_metrics},
                     {"rows", rows}});
  }
  j["seeds"] = seeds;
  j["mean"] = {row_json(report.mean_baseline), row_json(report.mean_selftr), row_json(report.mean_random)};
  j["gap_delta"] = report.gap_delta ? nlohmann::json(*report.gap_delta) : nlohmann::json(nullptr);
  j["acc_delta"] = report.acc_delta;
  j["seeds_with_smaller_gap"] = report.seeds_with_smaller_gap;
  return j;
}

std::string format_bench_table(const BenchReport& report) {
  std::vector<BenchRow> rows;
  for (const auto& s : report.seeds)
    for (auto& r : seed_rows(s)) rows.push_back(std::move(r));
  rows.push_back(report.mean_baseline);
  rows.push_back(report.mean_selftr);
  rows.push_back(report.mean_random);

  std::size_t w = 5;
  for (const auto& r : rows) w = std::max(w, r.name.size());
  auto pad = [](std::string s, std::size_t n) {
    if (s.size() < n) s.append(n - s.size(), ' ');
    return s;
  };
  std::ostringstream out;
  out << pad("", w) << "  " << pad("Overall", 16) << pad("X->en", 16) << pad("en->X", 16) << "Gap\n";
  out << pad("Model", w) << "  ";
  for (int i = 0; i < 3; ++i) out << pad("Acc", 8) << pad("F1", 8);
  out << "F1\n";
  for (const auto& r : rows) {
    out << pad(r.name, w) << "  " << pad(format_percent(r.overall_acc), 8) << pad(format_percent(r.overall_f1), 8)
        << pad(format_percent(r.x2en_acc), 8) << pad(format_percent(r.x2en_f1), 8) << pad(format_percent(r.en2x_acc), 8)
        << pad(format_percent(r.en2x_f1), 8) << format_percent(r.gap) << '\n';
  }
  out << "gap delta (selfTr - random): " << format_percent(report.gap_delta) << '\n';
  out << "acc delta (selfTr - random): " << format_percent(report.acc_delta) << '\n';
  out << "seeds with smaller selfTr gap: " << report.seeds_with_smaller_gap << '/' << report.seeds.size() << '\n';
  return out.str();
}

}  // namespace cstag
