#pragma once

// Internal access to TaggerModel storage for the trainer and serializer.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cstag/tagger.hpp"

namespace cstag {

// Locates the storage slot of (key, label); nullopt when unknown.
struct ParamSlot {
  bool transition = false;
  std::size_t index = 0;
};

struct ModelAccess {
  static std::optional<ParamSlot> slot(const TaggerModel& m, const FeatureKey& key, std::string_view label) {
    auto y = m.label_index(label);
    if (!y) return std::nullopt;
    const std::size_t l = m.label_count();
    if (key.tmpl == FeatureTemplate::PrevLabel) {
      std::size_t row;
      if (key.payload == kStartLabel) row = m.start_row();
      else if (auto p = m.label_index(key.payload)) row = *p;
      else return std::nullopt;
      return ParamSlot{true, row * l + *y};
    }
    auto f = m.find_feature(key.encoded());
    if (!f) return std::nullopt;
    return ParamSlot{false, *f * l + *y};
  }

  static std::size_t intern(TaggerModel& m, const std::string& encoded) { return m.intern_feature(encoded); }
  static std::vector<double>& weights(TaggerModel& m) { return m.weights_; }
  static std::vector<double>& accum(TaggerModel& m) { return m.accum_; }
  static std::vector<double>& trans_weights(TaggerModel& m) { return m.trans_weights_; }
  static std::vector<double>& trans_accum(TaggerModel& m) { return m.trans_accum_; }
  static const std::vector<std::string>& features(const TaggerModel& m) { return m.features_; }
  static const std::vector<double>& weights(const TaggerModel& m) { return m.weights_; }
  static const std::vector<double>& accum(const TaggerModel& m) { return m.accum_; }
  static const std::vector<double>& trans_weights(const TaggerModel& m) { return m.trans_weights_; }
  static const std::vector<double>& trans_accum(const TaggerModel& m) { return m.trans_accum_; }
  static void set_steps(TaggerModel& m, std::uint64_t steps) { m.steps_ = steps; }
  static void finish(TaggerModel& m) { m.recompute_averages(); }
};

}  // namespace cstag
