#include "cstag/tagger.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "cstag/rng.hpp"
#include "model_access.hpp"

namespace cstag {

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be at least 1");
}

std::string joint_label(std::string_view label, std::string_view lang) {
  std::string out(label);
  out += '\t';
  out += lang;
  return out;
}

std::string_view project_label(std::string_view internal_label) {
  return internal_label.substr(0, internal_label.find('\t'));
}

// ---------------------------------------------------------------------------
// TaggerModel

TaggerModel::TaggerModel(Task task, TaggerMode mode, TemplateSet templates)
    : task_(task), mode_(mode), templates_(templates), trans_weights_(0), trans_accum_(0),
      trans_averaged_(0) {}

std::optional<std::size_t> TaggerModel::label_index(std::string_view label) const {
  auto it = label_lookup_.find(std::string(label));
  if (it == label_lookup_.end()) return std::nullopt;
  return it->second;
}

std::size_t TaggerModel::add_label(const std::string& label) {
  if (auto idx = label_index(label)) return *idx;
  const std::size_t old_l = labels_.size();
  const std::size_t new_l = old_l + 1;
  labels_.push_back(label);
  label_lookup_.emplace(label, old_l);

  auto relayout_rows = [&](std::vector<double>& v, std::size_t rows) {
    std::vector<double> out(rows * new_l, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(r * old_l), old_l,
                  out.begin() + static_cast<std::ptrdiff_t>(r * new_l));
    v = std::move(out);
  };
  for (auto* v : {&weights_, &accum_, &averaged_}) relayout_rows(*v, features_.size());

  // Transition rows: old labels keep their row, the start row moves to the end.
  auto relayout_trans = [&](std::vector<double>& v) {
    std::vector<double> out((new_l + 1) * new_l, 0.0);
    if (old_l > 0) {
      for (std::size_t r = 0; r <= old_l; ++r) {
        std::size_t dst = r == old_l ? new_l : r;
        std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(r * old_l), old_l,
                    out.begin() + static_cast<std::ptrdiff_t>(dst * new_l));
      }
    }
    v = std::move(out);
  };
  for (auto* v : {&trans_weights_, &trans_accum_, &trans_averaged_}) relayout_trans(*v);
  return old_l;
}

std::size_t TaggerModel::intern_feature(const std::string& encoded) {
  auto [it, inserted] = feature_lookup_.try_emplace(encoded, static_cast<std::uint32_t>(features_.size()));
  if (inserted) {
    features_.push_back(encoded);
    for (auto* v : {&weights_, &accum_, &averaged_}) v->resize(v->size() + labels_.size(), 0.0);
  }
  return it->second;
}

std::optional<std::uint32_t> TaggerModel::find_feature(std::string_view encoded) const {
  auto it = feature_lookup_.find(std::string(encoded));
  if (it == feature_lookup_.end()) return std::nullopt;
  return it->second;
}

void TaggerModel::recompute_averages() {
  // avg = mean of the weight after each step = (w * T - sum_t (t-1) * delta_t) / T,
  // with integer-valued numerators so the result is exact.
  auto fill = [this](const std::vector<double>& w, const std::vector<double>& u, std::vector<double>& avg) {
    avg.resize(w.size());
    if (steps_ == 0) {
      avg = w;
      return;
    }
    const double t = static_cast<double>(steps_);
    for (std::size_t i = 0; i < w.size(); ++i) avg[i] = (w[i] * t - u[i]) / t;
  };
  fill(weights_, accum_, averaged_);
  fill(trans_weights_, trans_accum_, trans_averaged_);
}

double TaggerModel::weight(const FeatureKey& key, std::string_view label) const {
  auto slot = ModelAccess::slot(*this, key, label);
  if (!slot) return 0.0;
  return slot->transition ? trans_averaged_[slot->index] : averaged_[slot->index];
}

double TaggerModel::raw_weight(const FeatureKey& key, std::string_view label) const {
  auto slot = ModelAccess::slot(*this, key, label);
  if (!slot) return 0.0;
  return slot->transition ? trans_weights_[slot->index] : weights_[slot->index];
}

void TaggerModel::set_weight(const FeatureKey& key, std::string_view label, double value) {
  if (!label_index(label)) throw Error(ErrorCode::InvalidConfig, "unknown label '" + std::string(label) + "'");
  if (key.tmpl != FeatureTemplate::PrevLabel) intern_feature(key.encoded());
  auto slot = ModelAccess::slot(*this, key, label);
  if (!slot) throw Error(ErrorCode::InvalidConfig, "unknown previous label '" + key.payload + "'");
  if (slot->transition) {
    trans_weights_[slot->index] = value;
    trans_accum_[slot->index] = 0.0;
    trans_averaged_[slot->index] = value;
  } else {
    weights_[slot->index] = value;
    accum_[slot->index] = 0.0;
    averaged_[slot->index] = value;
  }
}

std::vector<WeightEntry> TaggerModel::entries() const {
  std::vector<WeightEntry> out;
  const std::size_t l = labels_.size();
  for (std::size_t f = 0; f < features_.size(); ++f)
    for (std::size_t y = 0; y < l; ++y) {
      const std::size_t i = f * l + y;
      if (weights_[i] != 0.0 || averaged_[i] != 0.0)
        out.push_back({features_[f], labels_[y], weights_[i], averaged_[i]});
    }
  for (std::size_t p = 0; p <= l && l > 0; ++p) {
    FeatureKey key{FeatureTemplate::PrevLabel, p == l ? std::string(kStartLabel) : labels_[p]};
    const std::string enc = key.encoded();
    for (std::size_t y = 0; y < l; ++y) {
      const std::size_t i = p * l + y;
      if (trans_weights_[i] != 0.0 || trans_averaged_[i] != 0.0)
        out.push_back({enc, labels_[y], trans_weights_[i], trans_averaged_[i]});
    }
  }
  return out;
}

namespace {

using ParamMap = std::map<std::pair<std::string, std::string>, std::tuple<double, double, double>>;

ParamMap canonical(const TaggerModel& m) {
  ParamMap out;
  const auto& labels = m.labels();
  const std::size_t l = labels.size();
  const auto& feats = ModelAccess::features(m);
  const auto& w = ModelAccess::weights(m);
  const auto& u = ModelAccess::accum(m);
  for (std::size_t f = 0; f < feats.size(); ++f)
    for (std::size_t y = 0; y < l; ++y) {
      const std::size_t i = f * l + y;
      if (w[i] != 0.0 || u[i] != 0.0) out[{feats[f], labels[y]}] = {w[i], u[i], m.weight(FeatureKey::decode(feats[f]), labels[y])};
    }
  const auto& tw = ModelAccess::trans_weights(m);
  const auto& tu = ModelAccess::trans_accum(m);
  for (std::size_t p = 0; p <= l && l > 0; ++p) {
    FeatureKey key{FeatureTemplate::PrevLabel, p == l ? std::string(kStartLabel) : labels[p]};
    for (std::size_t y = 0; y < l; ++y) {
      const std::size_t i = p * l + y;
      if (tw[i] != 0.0 || tu[i] != 0.0) out[{key.encoded(), labels[y]}] = {tw[i], tu[i], m.weight(key, labels[y])};
    }
  }
  return out;
}

}  // namespace

bool operator==(const TaggerModel& a, const TaggerModel& b) {
  if (a.task_ != b.task_ || a.mode_ != b.mode_ || a.templates_ != b.templates_ || a.steps_ != b.steps_ ||
      a.labels_ != b.labels_)
    return false;
  return canonical(a) == canonical(b);
}

// ---------------------------------------------------------------------------
// Decoding

namespace {

// Emission feature ids of one sentence, flattened with per-position offsets.
struct EncodedSentence {
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> offsets;  // size n + 1

  std::size_t size() const { return offsets.size() - 1; }
};

EncodedSentence encode_for_inference(const TaggerModel& model, const Sentence& sentence,
                                     const std::function<std::optional<std::uint32_t>(const std::string&)>& lookup) {
  EncodedSentence enc;
  enc.offsets.push_back(0);
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    keys.clear();
    append_emission_features(sentence, i, model.mode(), model.templates(), keys);
    for (const auto& k : keys)
      if (auto id = lookup(k)) enc.ids.push_back(*id);
    enc.offsets.push_back(enc.ids.size());
  }
  return enc;
}

// Exact first-order Viterbi. Ties resolve to the lowest label index.
std::vector<std::size_t> viterbi(const EncodedSentence& enc, std::size_t l, const double* emission,
                                 const double* transition, bool use_transitions) {
  const std::size_t n = enc.size();
  std::vector<double> em(n * l, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = em.data() + i * l;
    for (std::size_t k = enc.offsets[i]; k < enc.offsets[i + 1]; ++k) {
      const double* w = emission + static_cast<std::size_t>(enc.ids[k]) * l;
      for (std::size_t y = 0; y < l; ++y) row[y] += w[y];
    }
  }
  auto trans = [&](std::size_t prev, std::size_t y) {
    return use_transitions ? transition[prev * l + y] : 0.0;
  };

  std::vector<double> delta(n * l);
  std::vector<std::size_t> back(n * l, 0);
  for (std::size_t y = 0; y < l; ++y) delta[y] = trans(l, y) + em[y];
  for (std::size_t i = 1; i < n; ++i) {
    const double* prev = delta.data() + (i - 1) * l;
    for (std::size_t y = 0; y < l; ++y) {
      std::size_t best_p = 0;
      double best = prev[0] + trans(0, y);
      for (std::size_t p = 1; p < l; ++p) {
        double s = prev[p] + trans(p, y);
        if (s > best) {
          best = s;
          best_p = p;
        }
      }
      delta[i * l + y] = best + em[i * l + y];
      back[i * l + y] = best_p;
    }
  }
  std::vector<std::size_t> path(n);
  const double* last = delta.data() + (n - 1) * l;
  std::size_t best_y = 0;
  for (std::size_t y = 1; y < l; ++y)
    if (last[y] > last[best_y]) best_y = y;
  path[n - 1] = best_y;
  for (std::size_t i = n - 1; i > 0; --i) path[i - 1] = back[i * l + path[i]];
  return path;
}

bool uses_transitions(const TaggerModel& m) {
  return m.templates().test(static_cast<std::size_t>(FeatureTemplate::PrevLabel));
}

}  // namespace

class PerceptronTrainer {
 public:
  static std::vector<std::size_t> decode(const TaggerModel& model, const Sentence& sentence) {
    if (model.labels_.empty()) throw Error(ErrorCode::EmptyModel, "model has no labels");
    auto enc = encode_for_inference(model, sentence,
                                    [&](const std::string& k) { return model.find_feature(k); });
    return viterbi(enc, model.labels_.size(), model.averaged_.data(), model.trans_averaged_.data(),
                   uses_transitions(model));
  }

  static TaggerModel run(TaggerModel model, const Corpus& corpus, const TrainConfig& config,
                         const StepObserver& observer) {
    // Gold internal labels; new labels join the alphabet in sorted order.
    std::vector<std::vector<std::string>> gold_text;
    gold_text.reserve(corpus.size());
    std::set<std::string> fresh;
    for (const auto& s : corpus) {
      std::vector<std::string> g;
      g.reserve(s.size());
      for (const auto& t : s.tokens) {
        g.push_back(model.mode_ == TaggerMode::LangOutput ? joint_label(t.label, t.lang.raw) : t.label);
        if (!model.label_index(g.back())) fresh.insert(g.back());
      }
      gold_text.push_back(std::move(g));
    }
    for (const auto& label : fresh) model.add_label(label);
    const std::size_t l = model.labels_.size();

    std::vector<EncodedSentence> encoded;
    std::vector<std::vector<std::size_t>> gold;
    encoded.reserve(corpus.size());
    gold.reserve(corpus.size());
    for (std::size_t s = 0; s < corpus.size(); ++s) {
      encoded.push_back(encode_for_inference(model, corpus[s], [&](const std::string& k) {
        return std::optional<std::uint32_t>(static_cast<std::uint32_t>(model.intern_feature(k)));
      }));
      std::vector<std::size_t> g;
      for (const auto& label : gold_text[s]) g.push_back(*model.label_index(label));
      gold.push_back(std::move(g));
    }

    const bool transitions = uses_transitions(model);
    const std::size_t start = l;
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(config.seed);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      if (config.shuffle) rng.shuffle(order);
      for (std::size_t s : order) {
        const auto& enc = encoded[s];
        const auto& g = gold[s];
        auto pred = viterbi(enc, l, model.weights_.data(), model.trans_weights_.data(), transitions);
        if (pred != g) {
          // Each delta is weighted by the number of steps completed before it.
          const double before = static_cast<double>(model.steps_);
          auto bump = [&](std::vector<double>& w, std::vector<double>& u, std::size_t i, double d) {
            w[i] += d;
            u[i] += before * d;
          };
          for (std::size_t i = 0; i < enc.size(); ++i) {
            if (g[i] != pred[i]) {
              for (std::size_t k = enc.offsets[i]; k < enc.offsets[i + 1]; ++k) {
                const std::size_t row = static_cast<std::size_t>(enc.ids[k]) * l;
                bump(model.weights_, model.accum_, row + g[i], 1.0);
                bump(model.weights_, model.accum_, row + pred[i], -1.0);
              }
            }
            if (!transitions) continue;
            const std::size_t gp = i == 0 ? start : g[i - 1];
            const std::size_t pp = i == 0 ? start : pred[i - 1];
            if (gp != pp || g[i] != pred[i]) {
              bump(model.trans_weights_, model.trans_accum_, gp * l + g[i], 1.0);
              bump(model.trans_weights_, model.trans_accum_, pp * l + pred[i], -1.0);
            }
          }
        }
        ++model.steps_;
        if (observer) observer(model);
      }
    }
    model.recompute_averages();
    return model;
  }
};

std::vector<std::string> viterbi_decode(const TaggerModel& model, const Sentence& sentence) {
  auto path = PerceptronTrainer::decode(model, sentence);
  std::vector<std::string> out;
  out.reserve(path.size());
  for (auto y : path) out.push_back(model.labels()[y]);
  return out;
}

TaggerModel train(const Corpus& corpus, const TrainConfig& config, TaggerMode mode, const StepObserver& observer) {
  return fine_tune(TaggerModel(corpus.task(), mode, config.templates), corpus, config, mode, observer);
}

TaggerModel fine_tune(TaggerModel model, const Corpus& corpus, const TrainConfig& config,
                      std::optional<TaggerMode> expected_mode, const StepObserver& observer) {
  config.validate();
  if (expected_mode && *expected_mode != model.mode())
    throw Error(ErrorCode::ModeMismatch, "model is " + std::string(to_string(model.mode())) +
                                             " but " + std::string(to_string(*expected_mode)) + " was requested");
  if (corpus.task() != model.task())
    throw Error(ErrorCode::TaskMismatch, "model task " + std::string(to_string(model.task())) +
                                             " does not match corpus task " + std::string(to_string(corpus.task())));
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "no training sentences");
  if (!corpus.is_labeled()) throw Error(ErrorCode::UnlabeledGold, "training corpus contains `_` labels");
  return PerceptronTrainer::run(std::move(model), corpus, config, observer);
}

Corpus predict(const TaggerModel& model, const Corpus& corpus) {
  if (model.labels().empty()) throw Error(ErrorCode::EmptyModel, "model has no labels");
  if (corpus.task() != model.task())
    throw Error(ErrorCode::TaskMismatch, "model task " + std::string(to_string(model.task())) +
                                             " does not match corpus task " + std::string(to_string(corpus.task())));
  std::vector<Sentence> out = corpus.sentences();
  for (auto& s : out) {
    auto path = PerceptronTrainer::decode(model, s);
    std::vector<std::string> labels;
    labels.reserve(path.size());
    for (auto y : path) labels.emplace_back(project_label(model.labels()[y]));
    if (corpus.task() == Task::Ner) bio::repair(labels);
    for (std::size_t i = 0; i < labels.size(); ++i) s.tokens[i].label = std::move(labels[i]);
  }
  return Corpus(corpus.task(), std::move(out), corpus.header());
}

}  // namespace cstag
