#include "cstag/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace cstag {

namespace {

template <typename Fn>
void for_each_position(const Corpus& gold, PositionFilter positions, Fn&& fn) {
  if (positions) {
    for (const auto& ref : *positions) fn(ref.sentence, ref.token);
    return;
  }
  for (std::size_t s = 0; s < gold.size(); ++s)
    for (std::size_t t = 0; t < gold[s].size(); ++t) fn(s, t);
}

const std::string& label_at(const Corpus& c, std::size_t s, std::size_t t) { return c[s].tokens[t].label; }

}  // namespace

void check_comparable(const Corpus& gold, const Corpus& pred) {
  if (gold.task() != pred.task()) throw Error(ErrorCode::TaskMismatch, "gold and prediction tasks differ");
  if (gold.size() != pred.size())
    throw Error(ErrorCode::ShapeMismatch, "gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                                              std::to_string(pred.size()));
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto& g = gold[s].tokens;
    const auto& p = pred[s].tokens;
    if (g.size() != p.size())
      throw Error(ErrorCode::ShapeMismatch, "sentence " + std::to_string(s + 1) + " differs in length");
    for (std::size_t t = 0; t < g.size(); ++t)
      if (g[t].surface != p[t].surface)
        throw Error(ErrorCode::ShapeMismatch, "sentence " + std::to_string(s + 1) + " token " + std::to_string(t + 1) +
                                                  ": '" + g[t].surface + "' vs '" + p[t].surface + "'");
  }
  if (!gold.is_labeled()) throw Error(ErrorCode::UnlabeledGold, "gold corpus contains `_` labels");
}

std::optional<double> token_accuracy(const Corpus& gold, const Corpus& pred, PositionFilter positions) {
  check_comparable(gold, pred);
  std::size_t correct = 0, total = 0;
  for_each_position(gold, positions, [&](std::size_t s, std::size_t t) {
    ++total;
    if (label_at(gold, s, t) == label_at(pred, s, t)) ++correct;
  });
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

std::map<std::string, LabelScores> per_label_scores(const Corpus& gold, const Corpus& pred, PositionFilter positions) {
  check_comparable(gold, pred);
  std::map<std::string, LabelScores> scores;
  std::map<std::string, std::size_t> predicted, true_pos;
  for_each_position(gold, positions, [&](std::size_t s, std::size_t t) {
    const auto& g = label_at(gold, s, t);
    const auto& p = label_at(pred, s, t);
    scores[g].support += 1;
    predicted[p] += 1;
    if (g == p) true_pos[g] += 1;
  });
  for (auto& [label, sc] : scores) {
    const std::size_t tp = true_pos[label];
    sc.predicted = predicted[label];
    sc.precision = sc.predicted > 0 ? static_cast<double>(tp) / static_cast<double>(sc.predicted) : 0.0;
    sc.recall = static_cast<double>(tp) / static_cast<double>(sc.support);
    sc.f1 = sc.precision + sc.recall > 0.0 ? 2.0 * sc.precision * sc.recall / (sc.precision + sc.recall) : 0.0;
  }
  return scores;
}

std::optional<double> macro_f1(const Corpus& gold, const Corpus& pred, PositionFilter positions) {
  auto scores = per_label_scores(gold, pred, positions);
  if (scores.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [label, sc] : scores) sum += sc.f1;
  return sum / static_cast<double>(scores.size());
}

std::vector<Chunk> extract_chunks(std::size_t sentence_index, const std::vector<std::string>& labels) {
  std::vector<Chunk> chunks;
  std::optional<Chunk> open;
  auto close = [&](std::size_t at) {
    if (!open) return;
    open->end = at;
    chunks.push_back(*open);
    open.reset();
  };
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& label = labels[i];
    if (bio::is_inside(label) && open && open->type == bio::type_of(label)) continue;
    close(i);
    if (bio::is_begin(label) || bio::is_inside(label))
      open = Chunk{sentence_index, i, i, std::string(bio::type_of(label))};
  }
  close(labels.size());
  return chunks;
}

double chunk_f1(const Corpus& gold, const Corpus& pred) {
  if (gold.task() != Task::Ner) throw Error(ErrorCode::TaskMismatch, "chunk F1 requires an NER corpus");
  check_comparable(gold, pred);
  std::set<Chunk> gold_chunks, pred_chunks;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    for (auto& c : extract_chunks(s, labels_of(gold[s]))) gold_chunks.insert(std::move(c));
    for (auto& c : extract_chunks(s, labels_of(pred[s]))) pred_chunks.insert(std::move(c));
  }
  if (gold_chunks.empty() && pred_chunks.empty()) return 1.0;
  std::size_t tp = 0;
  for (const auto& c : pred_chunks) tp += gold_chunks.count(c);
  return 2.0 * static_cast<double>(tp) / static_cast<double>(gold_chunks.size() + pred_chunks.size());
}

std::optional<DirectionScores> EvalReport::direction(SwitchDirection d) const {
  auto it = per_direction.find(d);
  if (it == per_direction.end()) return std::nullopt;
  return it->second;
}

std::optional<double> EvalReport::gap() const {
  auto en2x = direction(SwitchDirection::EnToX);
  auto x2en = direction(SwitchDirection::XToEn);
  if (!en2x || !x2en) return std::nullopt;
  return std::abs(en2x->f1 - x2en->f1);
}

double EvalReport::headline() const {
  if (task == Task::Ner && chunk_f1) return *chunk_f1;
  return overall_acc;
}

std::vector<TokenRef> switch_positions(const Corpus& corpus, SwitchDirection direction, const SwitchOptions& options) {
  std::vector<TokenRef> refs;
  for (std::size_t s = 0; s < corpus.size(); ++s)
    for (const auto& p : detect_switch_points(corpus[s], options))
      if (p.direction == direction) refs.push_back({s, p.token_index});
  return refs;
}

EvalReport switch_point_report(const Corpus& gold, const Corpus& pred, const SwitchOptions& options) {
  check_comparable(gold, pred);
  if (gold.empty()) throw Error(ErrorCode::EmptyCorpus, "nothing to evaluate");
  EvalReport report;
  report.task = gold.task();
  report.n_tokens = gold.token_count();
  report.overall_acc = *token_accuracy(gold, pred);
  report.overall_f1 = *macro_f1(gold, pred);
  if (gold.task() == Task::Ner) report.chunk_f1 = chunk_f1(gold, pred);
  for (auto d : {SwitchDirection::EnToX, SwitchDirection::XToEn}) {
    const auto refs = switch_positions(gold, d, options);
    report.n_switch_points += refs.size();
    if (refs.empty()) continue;
    std::span<const TokenRef> view(refs);
    report.per_direction[d] = DirectionScores{*token_accuracy(gold, pred, view), *macro_f1(gold, pred, view), refs.size()};
  }
  return report;
}

std::vector<FractionRow> accuracy_by_fraction(const TrainConfig& config, TaggerMode mode, const Corpus& train_corpus,
                                              const Corpus& dev, const std::vector<double>& fractions,
                                              const SwitchOptions& options) {
  check_fractions(fractions);
  std::vector<FractionRow> rows;
  for (double f : fractions) {
    const std::size_t n = prefix_size(f, train_corpus.size());
    auto model = train(prefix(train_corpus, n), config, mode);
    rows.push_back({f, n, switch_point_report(dev, predict(model, dev), options)});
  }
  return rows;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j;
  j["task"] = to_string(report.task);
  j["n_tokens"] = report.n_tokens;
  j["n_switch_points"] = report.n_switch_points;
  j["overall"] = {{"acc", report.overall_acc}, {"f1", report.overall_f1}};
  if (report.chunk_f1) j["chunk_f1"] = *report.chunk_f1;
  nlohmann::json dirs = nlohmann::json::object();
  for (const auto& [d, sc] : report.per_direction)
    dirs[std::string(to_string(d))] = {{"acc", sc.acc}, {"f1", sc.f1}, {"support", sc.support}};
  j["per_direction"] = dirs;
  if (auto g = report.gap()) j["gap"] = *g;
  else j["gap"] = nullptr;
  return j;
}

std::string format_percent(std::optional<double> value) {
  if (!value) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *value * 100.0);
  return buf;
}

std::string format_report_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::size_t name_width = 5;
  for (const auto& [name, r] : rows) name_width = std::max(name_width, name.size());
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::ostringstream out;
  out << pad("", name_width) << "  " << pad("Overall", 16) << pad("X->en", 16) << pad("en->X", 16) << "Gap\n";
  out << pad("Model", name_width) << "  ";
  for (int i = 0; i < 3; ++i) out << pad("Acc", 8) << pad("F1", 8);
  out << "F1\n";
  for (const auto& [name, r] : rows) {
    auto x2en = r.direction(SwitchDirection::XToEn);
    auto en2x = r.direction(SwitchDirection::EnToX);
    out << pad(name, name_width) << "  " << pad(format_percent(r.overall_acc), 8)
        << pad(format_percent(r.task == Task::Ner && r.chunk_f1 ? r.chunk_f1 : std::optional<double>(r.overall_f1)), 8)
        << pad(format_percent(x2en ? std::optional<double>(x2en->acc) : std::nullopt), 8)
        << pad(format_percent(x2en ? std::optional<double>(x2en->f1) : std::nullopt), 8)
        << pad(format_percent(en2x ? std::optional<double>(en2x->acc) : std::nullopt), 8)
        << pad(format_percent(en2x ? std::optional<double>(en2x->f1) : std::nullopt), 8) << format_percent(r.gap())
        << '\n';
  }
  return out.str();
}

}  // namespace cstag
