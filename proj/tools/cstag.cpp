// cstag: command-line front end for the code-switching toolkit.

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cstag/bench.hpp"
#include "cstag/corpus.hpp"
#include "cstag/digest.hpp"
#include "cstag/manifest.hpp"
#include "cstag/metrics.hpp"
#include "cstag/selftrain.hpp"
#include "cstag/switchpoint.hpp"
#include "cstag/synth.hpp"
#include "cstag/tagger.hpp"

namespace fs = std::filesystem;
using namespace cstag;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

struct Globals {
  std::uint64_t seed = 13;
  bool json = false;
  bool quiet = false;
  std::string lang_map;
  bool lenient = false;
  bool neutral_breaks = false;
  bool allow_overlap = false;
};

Globals g;
RunManifest manifest;

const std::map<std::string, Task> kTasks = {{"pos", Task::Pos}, {"ner", Task::Ner}};
const std::map<std::string, TaggerMode> kModes = {
    {"plain", TaggerMode::Plain}, {"lang-input", TaggerMode::LangInput}, {"lang-output", TaggerMode::LangOutput}};
const std::map<std::string, SwitchDirection> kDirections = {{"en2x", SwitchDirection::EnToX},
                                                            {"x2en", SwitchDirection::XToEn}};
const std::map<std::string, BiasMode> kBiasModes = {
    {"auto", BiasMode::Auto}, {"perf", BiasMode::PerformanceBased}, {"ratio", BiasMode::RatioBased}};
const std::map<std::string, CorruptionScope> kScopes = {{"token", CorruptionScope::SwitchTokenOnly},
                                                        {"run", CorruptionScope::SwitchRun}};

SwitchOptions switch_options() { return SwitchOptions{g.neutral_breaks}; }

void note(const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

LangMap lang_map() {
  LangMap m = g.lang_map.empty() ? LangMap::defaults() : LangMap::load(g.lang_map);
  m.set_lenient(g.lenient);
  return m;
}

Corpus read_corpus(const std::string& path, Task task, bool repair_bio = false) {
  manifest.add_input(path);
  return parse_corpus(fs::path(path), task, lang_map(), ParseOptions{repair_bio});
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  write_text(out_path, text);
  manifest.outputs.push_back(out_path);
}

void finish_manifest(const fs::path& output, bool is_directory) {
  manifest.finished_at = utc_timestamp();
  write_manifest(manifest, manifest_path_for(output, is_directory));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + dir.string() + ": " + ec.message());
}

nlohmann::json ratio_json(const SwitchStats& st) {
  auto s = st.s();
  if (!s) return nullptr;
  if (std::isinf(*s)) return "inf";
  return *s;
}

// ---------------------------------------------------------------------------

struct StatsArgs {
  std::string corpus;
  std::string task = "pos";
  std::vector<double> fractions;
  bool table = false;
  std::string out;
};

int run_stats(const StatsArgs& a) {
  const Corpus corpus = read_corpus(a.corpus, kTasks.at(a.task));
  const auto opts = switch_options();
  const auto total = corpus_stats(corpus, opts);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> per_sentence;
  for (const auto& s : corpus) {
    auto st = sentence_stats(s, opts);
    ++per_sentence[{st.a, st.b}];
  }
  std::vector<HistogramRow> rows;
  if (!a.fractions.empty()) rows = direction_histogram(corpus, a.fractions, opts);

  std::string text;
  if (a.table) {
    std::ostringstream out;
    out << "a (en2x) = " << total.a << "\nb (x2en) = " << total.b << "\ns = " << ratio_json(total).dump() << '\n';
    if (!rows.empty()) {
      out << "\nfraction  sentences  en2x  x2en  s\n";
      for (const auto& r : rows) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-8.3f  %-9zu  %-4zu  %-4zu  ", r.fraction, r.n_sentences, r.stats.a,
                      r.stats.b);
        out << buf << ratio_json(r.stats).dump() << '\n';
      }
    }
    text = out.str();
  } else {
    nlohmann::json j;
    j["n_sentences"] = corpus.size();
    j["a"] = total.a;
    j["b"] = total.b;
    j["s"] = ratio_json(total);
    nlohmann::json hist = nlohmann::json::array();
    for (const auto& [ab, count] : per_sentence) hist.push_back({{"a", ab.first}, {"b", ab.second}, {"count", count}});
    j["per_sentence_histogram"] = hist;
    nlohmann::json dh = nlohmann::json::array();
    for (const auto& r : rows)
      dh.push_back({{"fraction", r.fraction},
                    {"n_sentences", r.n_sentences},
                    {"a", r.stats.a},
                    {"b", r.stats.b},
                    {"s", ratio_json(r.stats)}});
    j["direction_histogram"] = dh;
    text = j.dump(2) + "\n";
  }
  emit(text, a.out);
  if (!a.out.empty()) finish_manifest(a.out, false);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t sentences = 1000;
  double p_en2x = 0.3;
  double p_x2en = 0.1;
  double p_neutral = 0.1;
  std::string task = "pos";
  std::size_t min_len = 5;
  std::size_t max_len = 20;
  std::string start = "matrix";
  std::size_t words_per_cell = 40;
  double suffix_rate = 0.5;
  std::uint64_t vocab_seed = 1;
  double zipf = 1.0;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  VocabOptions vo{a.words_per_cell, a.suffix_rate, a.vocab_seed};
  auto spec = default_generator_spec(kTasks.at(a.task), vo);
  spec.n_sentences = a.sentences;
  spec.p_en_to_x = a.p_en2x;
  spec.p_x_to_en = a.p_x2en;
  spec.p_neutral = a.p_neutral;
  spec.min_len = a.min_len;
  spec.max_len = a.max_len;
  spec.start = a.start == "matrix" ? StartLanguage::Matrix : StartLanguage::Embedded;
  spec.zipf = a.zipf;
  spec.seed = g.seed;
  manifest.config["generator_spec_digest"] = spec.digest();
  const Corpus corpus = generate(spec);
  serialize_corpus(corpus, fs::path(a.out));
  manifest.outputs.push_back(a.out);
  finish_manifest(a.out, false);
  note("wrote " + std::to_string(corpus.size()) + " sentences to " + a.out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CorruptArgs {
  std::string in;
  std::string task = "pos";
  std::string direction = "en2x";
  double p = 0.6;
  std::string scope = "token";
  std::string out;
};

int run_corrupt(const CorruptArgs& a) {
  const Corpus corpus = read_corpus(a.in, kTasks.at(a.task));
  CorruptionSpec spec{kDirections.at(a.direction), a.p, kScopes.at(a.scope)};
  const Corpus noisy = corrupt(corpus, spec, g.seed, switch_options());
  serialize_corpus(noisy, fs::path(a.out));
  manifest.outputs.push_back(a.out);
  finish_manifest(a.out, false);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SplitArgs {
  std::string in;
  std::string task = "pos";
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
  std::string out_dir;
};

int run_split(const SplitArgs& a) {
  const Corpus corpus = read_corpus(a.in, kTasks.at(a.task));
  const auto parts = split_corpus(corpus, SplitFractions{a.train, a.dev, a.test}, g.seed);
  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  for (const auto& [name, part] : {std::pair{"train.tsv", &parts.train}, std::pair{"dev.tsv", &parts.dev},
                                   std::pair{"test.tsv", &parts.test}}) {
    serialize_corpus(*part, dir / name);
    manifest.outputs.push_back((dir / name).string());
  }
  finish_manifest(dir, true);
  return kExitOk;
}

struct StripArgs {
  std::string in;
  std::string task = "pos";
  std::string out;
};

int run_strip(const StripArgs& a) {
  const Corpus corpus = read_corpus(a.in, kTasks.at(a.task));
  serialize_corpus(strip_labels(corpus), fs::path(a.out));
  manifest.outputs.push_back(a.out);
  finish_manifest(a.out, false);
  return kExitOk;
}

// ---------------------------------------------------------------------------

TemplateSet parse_templates(const std::vector<std::string>& names) {
  if (names.empty()) return all_templates();
  TemplateSet t;
  for (const auto& n : names) t.set(static_cast<std::size_t>(parse_template(n)));
  return t;
}

struct TrainArgs {
  std::string train;
  std::string task = "pos";
  std::string mode = "plain";
  int epochs = 10;
  std::vector<std::string> templates;
  std::string out;
};

int run_train(const TrainArgs& a) {
  const Corpus corpus = read_corpus(a.train, kTasks.at(a.task));
  TrainConfig config;
  config.epochs = a.epochs;
  config.seed = g.seed;
  config.templates = parse_templates(a.templates);
  const auto model = train(corpus, config, kModes.at(a.mode));
  save_model(model, a.out);
  manifest.outputs.push_back(a.out);
  finish_manifest(a.out, false);
  note("trained on " + std::to_string(corpus.size()) + " sentences; " + std::to_string(model.labels().size()) +
       " labels, " + std::to_string(model.feature_count()) + " features");
  return kExitOk;
}

struct PredictArgs {
  std::string model;
  std::string in;
  std::string out;
};

int run_predict(const PredictArgs& a) {
  manifest.add_input(a.model);
  const auto model = load_model(a.model);
  const Corpus corpus = read_corpus(a.in, model.task());
  serialize_corpus(predict(model, corpus), fs::path(a.out));
  manifest.outputs.push_back(a.out);
  finish_manifest(a.out, false);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string gold;
  std::string pred;
  std::string task = "pos";
  bool table = false;
  bool per_label = false;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  const Task task = kTasks.at(a.task);
  const Corpus gold = read_corpus(a.gold, task);
  const Corpus pred = read_corpus(a.pred, task);
  const auto report = switch_point_report(gold, pred, switch_options());
  std::string text;
  if (g.json && !a.table) {
    auto j = to_json(report);
    if (a.per_label) {
      nlohmann::json pl = nlohmann::json::object();
      for (const auto& [label, sc] : per_label_scores(gold, pred))
        pl[label] = {{"precision", sc.precision}, {"recall", sc.recall}, {"f1", sc.f1}, {"support", sc.support},
                     {"predicted", sc.predicted}};
      j["per_label"] = pl;
    }
    text = j.dump(2) + "\n";
  } else {
    text = format_report_table({{fs::path(a.pred).filename().string(), report}});
    if (a.per_label) {
      std::ostringstream out;
      out << "\nlabel        P       R       F1      support\n";
      for (const auto& [label, sc] : per_label_scores(gold, pred)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-12s %-7s %-7s %-7s %zu\n", label.c_str(), format_percent(sc.precision).c_str(),
                      format_percent(sc.recall).c_str(), format_percent(sc.f1).c_str(), sc.support);
        out << buf;
      }
      text += out.str();
    }
  }
  emit(text, a.out);
  if (!a.out.empty()) finish_manifest(a.out, false);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct LoopArgs {
  std::string task = "pos";
  std::string mode = "plain";
  std::string bias = "auto";
  std::string fix_direction;
  std::size_t batch = 400;
  std::size_t max_iters = 5;
  std::size_t patience = 1;
  std::size_t min_biased_seed = 50;
  int annotator_epochs = 5;
  int end_epochs = 5;
  bool latest_only = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--task", task, "Task (pos|ner)")->check(CLI::IsMember({"pos", "ner"}))->capture_default_str();
    cmd->add_option("--mode", mode, "Tagger mode (plain|lang-input|lang-output)")
        ->check(CLI::IsMember({"plain", "lang-input", "lang-output"}))
        ->capture_default_str();
    cmd->add_option("--bias", bias, "Bias direction selection (auto|perf|ratio)")
        ->check(CLI::IsMember({"auto", "perf", "ratio"}))
        ->capture_default_str();
    cmd->add_option("--fix-direction", fix_direction, "Always bias toward this direction (en2x|x2en)")
        ->check(CLI::IsMember({"en2x", "x2en"}));
    cmd->add_option("--batch", batch, "Sentences added per iteration")->capture_default_str();
    cmd->add_option("--max-iters", max_iters, "Maximum number of iterations")->capture_default_str();
    cmd->add_option("--patience", patience, "Iterations without dev improvement before stopping")
        ->capture_default_str();
    cmd->add_option("--min-biased-seed", min_biased_seed,
                    "Smallest biased labeled subset used to seed the annotator")
        ->capture_default_str();
    cmd->add_option("--annotator-epochs", annotator_epochs, "Training epochs per annotator step")
        ->capture_default_str();
    cmd->add_option("--end-epochs", end_epochs, "Training epochs per end-model step")->capture_default_str();
    cmd->add_flag("--latest-only", latest_only, "Retrain the end model on the latest weak batch only");
  }

  SelfTrainConfig config() const {
    SelfTrainConfig c;
    c.batch_size = batch;
    c.max_iterations = max_iters;
    c.patience = patience;
    c.bias_mode = kBiasModes.at(bias);
    if (!fix_direction.empty()) c.fix_direction = kDirections.at(fix_direction);
    c.min_biased_seed = min_biased_seed;
    c.seed = g.seed;
    c.annotator_epochs = annotator_epochs;
    c.end_epochs = end_epochs;
    c.mode = kModes.at(mode);
    c.latest_only = latest_only;
    c.allow_overlap = g.allow_overlap;
    c.switch_options = switch_options();
    return c;
  }
};

struct SelfTrainArgs {
  std::string labeled, dev, unlabeled, out_dir;
  LoopArgs loop;
};

int run_selftrain(const SelfTrainArgs& a) {
  const Task task = kTasks.at(a.loop.task);
  const Corpus labeled = read_corpus(a.labeled, task);
  const Corpus dev = read_corpus(a.dev, task);
  const Corpus unlabeled = read_corpus(a.unlabeled, task);
  const auto config = a.loop.config();
  manifest.config["selftrain"] = config.to_json();
  const auto result = self_train(labeled, dev, unlabeled, config);

  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  std::string records;
  for (const auto& r : result.history) records += to_json(r).dump() + "\n";
  write_text(dir / "iterations.jsonl", records);
  write_text(dir / "result.json", to_json(result).dump(2) + "\n");
  std::vector<std::pair<std::string, EvalReport>> rows = {{"baseline", result.initial_dev_report}};
  for (const auto& r : result.history) rows.emplace_back("iteration " + std::to_string(r.iteration), r.dev_report);
  const std::string table = format_report_table(rows) + "best iteration: " +
                            std::to_string(result.best_iteration) + "\nstop reason: " + result.stop_reason + "\n";
  write_text(dir / "report.txt", table);
  serialize_corpus(result.augmented_corpus, dir / "augmented.tsv");
  save_model(result.best_model, dir / "model.bin");
  for (const char* f : {"iterations.jsonl", "result.json", "report.txt", "augmented.tsv", "model.bin"})
    manifest.outputs.push_back((dir / f).string());
  finish_manifest(dir, true);
  if (g.json) std::cout << to_json(result).dump(2) << '\n';
  else if (!g.quiet) std::cout << table;
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CurveArgs {
  std::string train, dev;
  std::string task = "pos";
  std::string mode = "plain";
  int epochs = 10;
  std::vector<double> fractions = {0.2, 0.4, 0.6, 0.8, 1.0};
  std::string out;
};

int run_curve(const CurveArgs& a) {
  const Task task = kTasks.at(a.task);
  const Corpus train_corpus = read_corpus(a.train, task);
  const Corpus dev = read_corpus(a.dev, task);
  TrainConfig config;
  config.epochs = a.epochs;
  config.seed = g.seed;
  const auto rows = accuracy_by_fraction(config, kModes.at(a.mode), train_corpus, dev, a.fractions, switch_options());
  std::string text;
  if (g.json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows)
      j.push_back({{"fraction", r.fraction}, {"n_train", r.n_train}, {"dev_report", to_json(r.dev_report)}});
    text = j.dump(2) + "\n";
  } else {
    std::vector<std::pair<std::string, EvalReport>> t;
    for (const auto& r : rows) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.0f%% (%zu)", r.fraction * 100.0, r.n_train);
      t.emplace_back(buf, r.dev_report);
    }
    text = format_report_table(t);
  }
  emit(text, a.out);
  if (!a.out.empty()) finish_manifest(a.out, false);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string labeled, dev, test, unlabeled;
  bool synthetic = false;
  std::size_t seeds = 5;
  std::string out_dir;
  LoopArgs loop;
};

int run_bench_cmd(const BenchArgs& a) {
  const Task task = kTasks.at(a.loop.task);
  BenchData data;
  if (a.synthetic) {
    SyntheticBenchOptions o;
    o.task = task;
    o.seed = g.seed;
    data = make_synthetic_bench(o);
    manifest.config["synthetic"] = true;
  } else {
    if (a.labeled.empty() || a.dev.empty() || a.test.empty() || a.unlabeled.empty())
      throw CLI::ValidationError("bench", "--labeled, --dev, --test and --unlabeled are required without --synthetic");
    data.labeled = read_corpus(a.labeled, task);
    data.dev = read_corpus(a.dev, task);
    data.test = read_corpus(a.test, task);
    data.unlabeled = read_corpus(a.unlabeled, task);
  }
  const auto config = a.loop.config();
  manifest.config["selftrain"] = config.to_json();
  manifest.config["seeds"] = a.seeds;
  for (std::size_t k = 0; k < a.seeds; ++k) manifest.seeds.push_back(g.seed + k);
  const auto report = run_bench(data.labeled, data.dev, data.test, data.unlabeled, config, a.seeds);
  const std::string json = to_json(report).dump(2) + "\n";
  const std::string table = format_bench_table(report);
  if (!a.out_dir.empty()) {
    ensure_dir(a.out_dir);
    const fs::path dir(a.out_dir);
    write_text(dir / "bench.json", json);
    write_text(dir / "bench.txt", table);
    manifest.outputs.push_back((dir / "bench.json").string());
    manifest.outputs.push_back((dir / "bench.txt").string());
    finish_manifest(dir, true);
  }
  std::cout << (g.json ? json : table);
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidFractions:
    case ErrorCode::InvalidSpec:
    case ErrorCode::ModeMismatch:
      return kExitUsage;
    default:
      return is_data_error(e.code()) ? kExitData : kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cstag: code-switching sequence labeling with switch-point biased self-training"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_flag("--json", g.json, "Emit JSON instead of tables");
  app.add_flag("--quiet", g.quiet, "Suppress progress messages on stderr");
  app.add_option("--lang-map", g.lang_map, "Language map file (rawtag<TAB>matrix|embedded|neutral)")
      ->check(CLI::ExistingFile);
  app.add_flag("--lenient", g.lenient, "Map unknown language tags to neutral instead of failing");
  app.add_flag("--neutral-breaks", g.neutral_breaks, "Neutral tokens reset the language context");
  app.add_flag("--allow-overlap", g.allow_overlap, "Allow sentence ids shared by the unlabeled pool and dev or test");

  auto task_opt = [](CLI::App* cmd, std::string& task) {
    cmd->add_option("--task", task, "Task (pos|ner)")->check(CLI::IsMember({"pos", "ner"}))->capture_default_str();
  };

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Switch-point counts and the ratio s = a/b");
  c_stats->add_option("corpus", stats.corpus, "Corpus file")->required()->check(CLI::ExistingFile);
  task_opt(c_stats, stats.task);
  c_stats->add_option("--fractions", stats.fractions, "Comma-separated training-set fractions for prefix counts")
      ->delimiter(',');
  c_stats->add_flag("--table", stats.table, "Human-readable table instead of JSON");
  c_stats->add_option("--out", stats.out, "Output file (default stdout)");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic code-switched corpus");
  c_synth->add_option("--sentences", synth.sentences, "Number of sentences")->capture_default_str();
  c_synth->add_option("--p-en2x", synth.p_en2x, "Per-token probability of a matrix-to-embedded switch")
      ->capture_default_str();
  c_synth->add_option("--p-x2en", synth.p_x2en, "Per-token probability of an embedded-to-matrix switch")
      ->capture_default_str();
  c_synth->add_option("--p-neutral", synth.p_neutral, "Probability of a neutral token")->capture_default_str();
  task_opt(c_synth, synth.task);
  c_synth->add_option("--min-len", synth.min_len, "Minimum sentence length")->capture_default_str();
  c_synth->add_option("--max-len", synth.max_len, "Maximum sentence length")->capture_default_str();
  c_synth->add_option("--start", synth.start, "Starting language (matrix|embedded)")
      ->check(CLI::IsMember({"matrix", "embedded"}))
      ->capture_default_str();
  c_synth->add_option("--words-per-cell", synth.words_per_cell, "Vocabulary size per (language, label)")
      ->capture_default_str();
  c_synth->add_option("--suffix-rate", synth.suffix_rate, "Fraction of words carrying a label suffix")
      ->capture_default_str();
  c_synth->add_option("--vocab-seed", synth.vocab_seed, "Seed for the pseudo-word vocabulary")->capture_default_str();
  c_synth->add_option("--zipf", synth.zipf, "Zipf exponent for word frequencies")->capture_default_str();
  c_synth->add_option("--out", synth.out, "Output corpus file")->required();

  CorruptArgs corr;
  auto* c_corrupt = app.add_subcommand("corrupt", "Corrupt labels at switch points of one direction");
  c_corrupt->add_option("--in", corr.in, "Input corpus")->required()->check(CLI::ExistingFile);
  task_opt(c_corrupt, corr.task);
  c_corrupt->add_option("--direction", corr.direction, "Target direction (en2x|x2en)")
      ->check(CLI::IsMember({"en2x", "x2en"}))
      ->capture_default_str();
  c_corrupt->add_option("--p", corr.p, "Corruption probability")->capture_default_str();
  c_corrupt->add_option("--scope", corr.scope, "Corrupt the switch token only or its whole run (token|run)")
      ->check(CLI::IsMember({"token", "run"}))
      ->capture_default_str();
  c_corrupt->add_option("--out", corr.out, "Output corpus")->required();

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Seeded train/dev/test split");
  c_split->add_option("--in", split.in, "Input corpus")->required()->check(CLI::ExistingFile);
  task_opt(c_split, split.task);
  c_split->add_option("--train", split.train, "Train fraction")->capture_default_str();
  c_split->add_option("--dev", split.dev, "Dev fraction")->capture_default_str();
  c_split->add_option("--test", split.test, "Test fraction")->capture_default_str();
  c_split->add_option("--out-dir", split.out_dir, "Directory for train.tsv, dev.tsv, test.tsv")->required();

  StripArgs strip;
  auto* c_strip = app.add_subcommand("strip", "Replace every label with `_`");
  c_strip->add_option("--in", strip.in, "Input corpus")->required()->check(CLI::ExistingFile);
  task_opt(c_strip, strip.task);
  c_strip->add_option("--out", strip.out, "Output corpus")->required();

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train an averaged perceptron tagger");
  c_train->add_option("--train", tr.train, "Labeled training corpus")->required()->check(CLI::ExistingFile);
  task_opt(c_train, tr.task);
  c_train->add_option("--mode", tr.mode, "Tagger mode (plain|lang-input|lang-output)")
      ->check(CLI::IsMember({"plain", "lang-input", "lang-output"}))
      ->capture_default_str();
  c_train->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
  c_train->add_option("--templates", tr.templates,
                      "Comma-separated feature templates (w,shape,pre,suf,ng,pw,nw,lang,prev); default all")
      ->delimiter(',');
  c_train->add_option("--out", tr.out, "Model file (.json for JSON, otherwise CBOR)")->required();

  PredictArgs pr;
  auto* c_predict = app.add_subcommand("predict", "Tag a corpus with a trained model");
  c_predict->add_option("--model", pr.model, "Model file")->required()->check(CLI::ExistingFile);
  c_predict->add_option("--in", pr.in, "Input corpus (labels ignored)")->required()->check(CLI::ExistingFile);
  c_predict->add_option("--out", pr.out, "Output corpus")->required();

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Overall and switch-point evaluation");
  c_eval->add_option("--gold", ev.gold, "Gold corpus")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--pred", ev.pred, "Predicted corpus")->required()->check(CLI::ExistingFile);
  task_opt(c_eval, ev.task);
  c_eval->add_flag("--table", ev.table, "Table output (default unless --json)");
  c_eval->add_flag("--per-label", ev.per_label, "Include per-label precision, recall and F1");
  c_eval->add_option("--out", ev.out, "Output file (default stdout)");

  SelfTrainArgs st;
  auto* c_self = app.add_subcommand("selftrain", "Switch-point biased self-training");
  c_self->add_option("--labeled", st.labeled, "Labeled training corpus")->required()->check(CLI::ExistingFile);
  c_self->add_option("--dev", st.dev, "Labeled dev corpus")->required()->check(CLI::ExistingFile);
  c_self->add_option("--unlabeled", st.unlabeled, "Unlabeled pool")->required()->check(CLI::ExistingFile);
  st.loop.add_to(c_self);
  c_self->add_option("--out-dir", st.out_dir, "Output directory")->required();

  CurveArgs cv;
  auto* c_curve = app.add_subcommand("curve", "Switch-point accuracy by training-set fraction");
  c_curve->add_option("--train", cv.train, "Labeled training corpus")->required()->check(CLI::ExistingFile);
  c_curve->add_option("--dev", cv.dev, "Labeled dev corpus")->required()->check(CLI::ExistingFile);
  task_opt(c_curve, cv.task);
  c_curve->add_option("--mode", cv.mode, "Tagger mode (plain|lang-input|lang-output)")
      ->check(CLI::IsMember({"plain", "lang-input", "lang-output"}))
      ->capture_default_str();
  c_curve->add_option("--epochs", cv.epochs, "Training epochs")->capture_default_str();
  c_curve->add_option("--fractions", cv.fractions, "Comma-separated training-set fractions")->delimiter(',');
  c_curve->add_option("--out", cv.out, "Output file (default stdout)");

  BenchArgs bn;
  auto* c_bench = app.add_subcommand("bench", "Biased versus random self-training over several seeds");
  c_bench->add_option("--labeled", bn.labeled, "Labeled training corpus")->check(CLI::ExistingFile);
  c_bench->add_option("--dev", bn.dev, "Labeled dev corpus")->check(CLI::ExistingFile);
  c_bench->add_option("--test", bn.test, "Labeled test corpus")->check(CLI::ExistingFile);
  c_bench->add_option("--unlabeled", bn.unlabeled, "Unlabeled pool")->check(CLI::ExistingFile);
  c_bench->add_flag("--synthetic", bn.synthetic, "Use the built-in asymmetric synthetic benchmark");
  c_bench->add_option("--seeds", bn.seeds, "Number of seeds")->capture_default_str();
  bn.loop.add_to(c_bench);
  c_bench->add_option("--out-dir", bn.out_dir, "Directory for bench.json and bench.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  manifest.command_line.assign(argv, argv + argc);
  manifest.started_at = utc_timestamp();
  manifest.seeds = {g.seed};
  auto* sub = app.get_subcommands().front();
  manifest.command = sub->get_name();
  nlohmann::json args = nlohmann::json::object();
  for (auto* app_level : {&app, sub})
    for (const auto* opt : app_level->get_options())
      if (opt->count() > 0 && opt->get_name() != "--help") args[opt->get_name()] = opt->results();
  manifest.config["args"] = args;

  try {
    if (c_stats->parsed()) return run_stats(stats);
    if (c_synth->parsed()) return run_synth(synth);
    if (c_corrupt->parsed()) return run_corrupt(corr);
    if (c_split->parsed()) return run_split(split);
    if (c_strip->parsed()) return run_strip(strip);
    if (c_train->parsed()) return run_train(tr);
    if (c_predict->parsed()) return run_predict(pr);
    if (c_eval->parsed()) return run_eval(ev);
    if (c_self->parsed()) return run_selftrain(st);
    if (c_curve->parsed()) return run_curve(cv);
    if (c_bench->parsed()) return run_bench_cmd(bn);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
