#include "cstag/selftrain.hpp"

#include <algorithm>
#include <unordered_set>

#include "cstag/rng.hpp"

namespace cstag {

namespace {

// Sub-stream identifiers for derive_seed.
enum Stream : std::uint64_t { kEndModel = 1, kAnnotator = 2, kBatch = 3 };

void check_unique_ids(const Corpus& corpus, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& s : corpus)
    if (!seen.insert(s.id).second)
      throw Error(ErrorCode::DuplicateSentenceId, std::string(what) + " repeats sentence id '" + s.id + "'");
}

void check_inputs(const Corpus& labeled, const Corpus& dev, const Corpus& unlabeled, const SelfTrainConfig& config) {
  config.validate();
  if (labeled.empty()) throw Error(ErrorCode::EmptyCorpus, "labeled corpus is empty");
  if (dev.empty()) throw Error(ErrorCode::EmptyCorpus, "dev corpus is empty");
  if (!labeled.is_labeled()) throw Error(ErrorCode::UnlabeledGold, "labeled corpus contains `_` labels");
  if (!dev.is_labeled()) throw Error(ErrorCode::UnlabeledGold, "dev corpus contains `_` labels");
  if (dev.task() != labeled.task() || (!unlabeled.empty() && unlabeled.task() != labeled.task()))
    throw Error(ErrorCode::TaskMismatch, "labeled, dev and unlabeled corpora must share a task");
  check_unique_ids(unlabeled, "unlabeled pool");
  if (!config.allow_overlap) {
    std::unordered_set<std::string> dev_ids;
    for (const auto& s : dev) dev_ids.insert(s.id);
    for (const auto& s : unlabeled)
      if (dev_ids.count(s.id))
        throw Error(ErrorCode::OverlappingSentences,
                    "sentence id '" + s.id + "' occurs in both the unlabeled pool and dev");
  }
}

TrainConfig step_config(const SelfTrainConfig& c, Stream stream, std::size_t iteration) {
  TrainConfig t;
  t.epochs = stream == kAnnotator ? c.annotator_epochs : c.end_epochs;
  t.seed = derive_seed(c.seed, stream, iteration);
  t.templates = c.templates;
  return t;
}

Corpus with_weak(const Corpus& labeled, const std::vector<Sentence>& weak) {
  std::vector<Sentence> all = labeled.sentences();
  all.insert(all.end(), weak.begin(), weak.end());
  return Corpus(labeled.task(), std::move(all), labeled.header());
}

Corpus remove_ids(const Corpus& pool, const Corpus& batch) {
  std::unordered_set<std::string> drop;
  for (const auto& s : batch) drop.insert(s.id);
  std::vector<Sentence> keep;
  for (const auto& s : pool)
    if (!drop.count(s.id)) keep.push_back(s);
  return Corpus(pool.task(), std::move(keep), pool.header());
}

Corpus favoring_subset(const Corpus& corpus, SwitchDirection d, const SwitchOptions& options) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (sentence_stats(corpus[i], options).favors(d)) idx.push_back(i);
  return select_sentences(corpus, idx);
}

enum class Strategy { Biased, Random };

SelfTrainResult run_loop(Strategy strategy, const Corpus& labeled, const Corpus& dev, const Corpus& unlabeled,
                         const SelfTrainConfig& config, const std::optional<std::vector<std::size_t>>& schedule) {
  check_inputs(labeled, dev, unlabeled, config);
  const auto& sw = config.switch_options;

  SelfTrainResult result;
  TaggerModel end_model = train(labeled, step_config(config, kEndModel, 0), config.mode);
  result.initial_model = end_model;
  result.best_model = end_model;
  result.initial_dev_report = switch_point_report(dev, predict(end_model, dev), sw);
  double best_metric = result.initial_dev_report.headline();
  std::vector<Sentence> best_weak;

  Corpus pool = unlabeled.empty() ? unlabeled : strip_labels(unlabeled);
  if (pool.empty()) {
    result.augmented_corpus = labeled;
    result.stop_reason = "empty pool";
    return result;
  }

  auto choose_direction = [&](const TaggerModel& model) {
    if (config.fix_direction) return *config.fix_direction;
    return select_bias_direction(model, dev, config.bias_mode, pool, sw);
  };

  Corpus annotator_seed = labeled;
  if (strategy == Strategy::Biased) {
    try {
      auto subset = favoring_subset(labeled, choose_direction(end_model), sw);
      if (subset.size() >= config.min_biased_seed) annotator_seed = std::move(subset);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoSwitchPoints) throw;
      result.augmented_corpus = labeled;
      result.stop_reason = std::string("no switch points: ") + e.what();
      return result;
    }
  }
  TaggerModel annotator = train(annotator_seed, step_config(config, kAnnotator, 0), config.mode);

  std::vector<Sentence> weak;
  std::size_t cumulative = 0;
  result.stop_reason = "max iterations";
  const std::size_t limit = schedule ? schedule->size() : config.max_iterations;
  for (std::size_t iter = 1; iter <= limit; ++iter) {
    if (pool.empty()) {
      result.stop_reason = "pool exhausted";
      break;
    }
    const std::uint64_t batch_seed = derive_seed(config.seed, kBatch, iter);
    IterationRecord record;
    record.iteration = iter;
    Corpus batch;
    if (strategy == Strategy::Biased) {
      try {
        const auto d = choose_direction(end_model);
        record.bias_direction = d;
        batch = subsample_biased(pool, d, config.batch_size, batch_seed, sw);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoEligibleSentences && e.code() != ErrorCode::NoSwitchPoints) throw;
        result.stop_reason = e.what();
        break;
      }
    } else {
      const std::size_t n = schedule ? (*schedule)[iter - 1] : config.batch_size;
      if (n == 0) {
        result.stop_reason = "schedule complete";
        break;
      }
      batch = subsample_random(pool, n, batch_seed);
    }
    pool = remove_ids(pool, batch);

    std::vector<Sentence> annotated = predict(annotator, batch).sentences();
    for (auto& s : annotated) s.weak = true;
    Corpus annotated_corpus(labeled.task(), annotated);
    annotator = fine_tune(std::move(annotator), concat(annotated_corpus, labeled),
                          step_config(config, kAnnotator, iter), config.mode);

    if (config.latest_only) weak = annotated;
    else weak.insert(weak.end(), annotated.begin(), annotated.end());
    end_model = train(with_weak(labeled, weak), step_config(config, kEndModel, iter), config.mode);

    record.n_added = annotated.size();
    cumulative += record.n_added;
    record.cumulative_augmented = cumulative;
    for (const auto& s : annotated) record.added_ids.push_back(s.id);
    record.dev_report = switch_point_report(dev, predict(end_model, dev), sw);
    const double metric = record.dev_report.headline();
    result.history.push_back(std::move(record));

    if (metric > best_metric) {
      best_metric = metric;
      result.best_iteration = iter;
      result.best_model = end_model;
      best_weak = weak;
    }
    if (!schedule && iter - result.best_iteration >= config.patience) {
      result.stop_reason = "dev metric stopped improving";
      break;
    }
  }
  result.augmented_corpus = with_weak(labeled, best_weak);
  return result;
}

}  // namespace

std::string_view to_string(BiasMode mode) {
  switch (mode) {
    case BiasMode::PerformanceBased: return "perf";
    case BiasMode::RatioBased: return "ratio";
    case BiasMode::Auto: return "auto";
  }
  return "auto";
}

BiasMode parse_bias_mode(std::string_view text) {
  if (text == "perf") return BiasMode::PerformanceBased;
  if (text == "ratio") return BiasMode::RatioBased;
  if (text == "auto") return BiasMode::Auto;
  throw Error(ErrorCode::InvalidConfig, "unknown bias mode '" + std::string(text) + "'");
}

void SelfTrainConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch size must be at least 1");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "max iterations must be at least 1");
  if (patience < 1) throw Error(ErrorCode::InvalidConfig, "patience must be at least 1");
  if (annotator_epochs < 1 || end_epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be at least 1");
}

nlohmann::json SelfTrainConfig::to_json() const {
  nlohmann::json j;
  j["batch_size"] = batch_size;
  j["max_iterations"] = max_iterations;
  j["patience"] = patience;
  j["bias_mode"] = to_string(bias_mode);
  j["fix_direction"] = fix_direction ? nlohmann::json(to_string(*fix_direction)) : nlohmann::json(nullptr);
  j["min_biased_seed"] = min_biased_seed;
  j["seed"] = seed;
  j["annotator_epochs"] = annotator_epochs;
  j["end_epochs"] = end_epochs;
  j["mode"] = to_string(mode);
  j["templates"] = templates.to_string();
  j["latest_only"] = latest_only;
  j["allow_overlap"] = allow_overlap;
  j["neutral_breaks"] = switch_options.neutral_breaks;
  return j;
}

double SelfTrainResult::best_metric() const {
  return best_iteration == 0 ? initial_dev_report.headline() : history[best_iteration - 1].dev_report.headline();
}

SwitchDirection select_bias_direction(const TaggerModel& model, const Corpus& dev, BiasMode mode,
                                      const Corpus& unlabeled, const SwitchOptions& options) {
  auto by_ratio = [&] {
    const auto stats = corpus_stats(unlabeled, options);
    if (stats.ratio_kind() == RatioKind::Undefined)
      throw Error(ErrorCode::NoSwitchPoints, "unlabeled pool has no switch points");
    // s < 1  <=>  a < b; s = 1 resolves to XToEn.
    return stats.a < stats.b ? SwitchDirection::EnToX : SwitchDirection::XToEn;
  };
  if (mode == BiasMode::RatioBased) return by_ratio();

  const auto report = switch_point_report(dev, predict(model, dev), options);
  const auto en2x = report.direction(SwitchDirection::EnToX);
  const auto x2en = report.direction(SwitchDirection::XToEn);
  if (!en2x && !x2en) {
    if (mode == BiasMode::Auto) return by_ratio();
    throw Error(ErrorCode::NoSwitchPoints, "dev corpus has no switch points");
  }
  if (!x2en) return SwitchDirection::EnToX;
  if (!en2x) return SwitchDirection::XToEn;
  if (en2x->f1 != x2en->f1) return en2x->f1 < x2en->f1 ? SwitchDirection::EnToX : SwitchDirection::XToEn;
  if (en2x->acc != x2en->acc) return en2x->acc < x2en->acc ? SwitchDirection::EnToX : SwitchDirection::XToEn;
  return SwitchDirection::EnToX;
}

Corpus subsample_biased(const Corpus& pool, SwitchDirection direction, std::size_t n, std::uint64_t seed,
                        const SwitchOptions& options) {
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "sample size must be at least 1");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (sentence_stats(pool[i], options).favors(direction)) eligible.push_back(i);
  if (eligible.empty())
    throw Error(ErrorCode::NoEligibleSentences,
                "no pool sentence favors " + std::string(to_string(direction)));
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (std::size_t k : rng.sample_without_replacement(eligible.size(), n)) chosen.push_back(eligible[k]);
  return select_sentences(pool, chosen);
}

Corpus subsample_random(const Corpus& pool, std::size_t n, std::uint64_t seed) {
  if (pool.empty()) throw Error(ErrorCode::EmptyPool, "unlabeled pool is empty");
  if (n < 1) throw Error(ErrorCode::InvalidConfig, "sample size must be at least 1");
  Rng rng(seed);
  return select_sentences(pool, rng.sample_without_replacement(pool.size(), n));
}

SelfTrainResult self_train(const Corpus& labeled, const Corpus& dev, const Corpus& unlabeled,
                           const SelfTrainConfig& config) {
  return run_loop(Strategy::Biased, labeled, dev, unlabeled, config, std::nullopt);
}

SelfTrainResult random_baseline(const Corpus& labeled, const Corpus& dev, const Corpus& unlabeled,
                                const SelfTrainConfig& config, const std::optional<std::vector<std::size_t>>& schedule) {
  return run_loop(Strategy::Random, labeled, dev, unlabeled, config, schedule);
}

std::vector<std::size_t> batch_schedule(const SelfTrainResult& result) {
  std::vector<std::size_t> s;
  for (const auto& r : result.history) s.push_back(r.n_added);
  return s;
}

nlohmann::json to_json(const IterationRecord& record) {
  nlohmann::json j;
  j["iteration"] = record.iteration;
  j["bias_direction"] =
      record.bias_direction ? nlohmann::json(to_string(*record.bias_direction)) : nlohmann::json(nullptr);
  j["n_added"] = record.n_added;
  j["cumulative_augmented"] = record.cumulative_augmented;
  j["dev_report"] = to_json(record.dev_report);
  j["added_ids"] = record.added_ids;
  return j;
}

nlohmann::json to_json(const SelfTrainResult& result) {
  nlohmann::json j;
  j["best_iteration"] = result.best_iteration;
  j["best_metric"] = result.best_metric();
  j["stop_reason"] = result.stop_reason;
  j["initial_dev_report"] = to_json(result.initial_dev_report);
  nlohmann::json h = nlohmann::json::array();
  for (const auto& r : result.history) h.push_back(to_json(r));
  j["history"] = h;
  j["augmented_sentences"] = result.augmented_corpus.size();
  return j;
}

}  // namespace cstag
