#include <fstream>
#include <iterator>

#include <json.hpp>

#include "cstag/tagger.hpp"
#include "model_access.hpp"

namespace cstag {

namespace {

using nlohmann::json;

constexpr std::string_view kFormatName = "cstag-tagger";

json to_json(const TaggerModel& m) {
  json j;
  j["format"] = kFormatName;
  j["format_version"] = kModelFormatVersion;
  j["task"] = to_string(m.task());
  j["mode"] = to_string(m.mode());
  json templates = json::array();
  for (std::size_t t = 0; t < kTemplateCount; ++t)
    if (m.templates().test(t)) templates.push_back(template_name(static_cast<FeatureTemplate>(t)));
  j["templates"] = templates;
  j["labels"] = m.labels();
  j["updates_seen"] = m.updates_seen();

  // Sparse storage: only features with a non-zero parameter are kept.
  const auto& feats = ModelAccess::features(m);
  const auto& w = ModelAccess::weights(m);
  const auto& u = ModelAccess::accum(m);
  const std::size_t l = m.labels().size();
  json features = json::array();
  json emission = json::array();
  for (std::size_t f = 0; f < feats.size(); ++f) {
    bool kept = false;
    for (std::size_t y = 0; y < l; ++y) {
      const std::size_t i = f * l + y;
      if (w[i] == 0.0 && u[i] == 0.0) continue;
      if (!kept) {
        features.push_back(feats[f]);
        kept = true;
      }
      emission.push_back(json::array({features.size() - 1, y, w[i], u[i]}));
    }
  }
  j["features"] = std::move(features);
  j["emission"] = std::move(emission);

  const auto& tw = ModelAccess::trans_weights(m);
  const auto& tu = ModelAccess::trans_accum(m);
  json transitions = json::array();
  for (std::size_t i = 0; i < tw.size(); ++i)
    if (tw[i] != 0.0 || tu[i] != 0.0) transitions.push_back(json::array({i / l, i % l, tw[i], tu[i]}));
  j["transitions"] = std::move(transitions);
  return j;
}

TaggerModel from_json(const json& j) {
  if (!j.is_object() || j.value("format", std::string{}) != kFormatName)
    throw Error(ErrorCode::ParseError, "not a cstag tagger model");
  const int version = j.at("format_version").get<int>();
  if (version != kModelFormatVersion)
    throw Error(ErrorCode::VersionMismatch, "model format version " + std::to_string(version) +
                                                " is not supported (expected " +
                                                std::to_string(kModelFormatVersion) + ")");
  TemplateSet templates;
  for (const auto& name : j.at("templates")) templates.set(static_cast<std::size_t>(parse_template(name.get<std::string>())));
  TaggerModel m(parse_task(j.at("task").get<std::string>()), parse_mode(j.at("mode").get<std::string>()), templates);
  for (const auto& label : j.at("labels")) m.add_label(label.get<std::string>());
  const std::size_t l = m.labels().size();

  std::vector<std::size_t> ids;
  for (const auto& f : j.at("features")) ids.push_back(ModelAccess::intern(m, f.get<std::string>()));
  auto& w = ModelAccess::weights(m);
  auto& u = ModelAccess::accum(m);
  for (const auto& e : j.at("emission")) {
    const auto f = e.at(0).get<std::size_t>();
    const auto y = e.at(1).get<std::size_t>();
    if (f >= ids.size() || y >= l) throw Error(ErrorCode::ParseError, "emission entry out of range");
    w[ids[f] * l + y] = e.at(2).get<double>();
    u[ids[f] * l + y] = e.at(3).get<double>();
  }
  auto& tw = ModelAccess::trans_weights(m);
  auto& tu = ModelAccess::trans_accum(m);
  for (const auto& e : j.at("transitions")) {
    const auto p = e.at(0).get<std::size_t>();
    const auto y = e.at(1).get<std::size_t>();
    if (p > l || y >= l) throw Error(ErrorCode::ParseError, "transition entry out of range");
    tw[p * l + y] = e.at(2).get<double>();
    tu[p * l + y] = e.at(3).get<double>();
  }
  ModelAccess::set_steps(m, j.at("updates_seen").get<std::uint64_t>());
  ModelAccess::finish(m);
  return m;
}

}  // namespace

std::vector<std::uint8_t> encode_model(const TaggerModel& model) { return json::to_cbor(to_json(model)); }

std::string encode_model_json(const TaggerModel& model) { return to_json(model).dump(1); }

TaggerModel decode_model(const std::vector<std::uint8_t>& bytes) {
  try {
    json j;
    if (!bytes.empty() && (bytes.front() == '{' || bytes.front() == ' ' || bytes.front() == '\n'))
      j = json::parse(bytes.begin(), bytes.end());
    else
      j = json::from_cbor(bytes);
    return from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("corrupt model file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, std::string("corrupt model file: ") + e.what());
  }
}

void save_model(const TaggerModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  if (path.extension() == ".json") {
    out << encode_model_json(model) << '\n';
  } else {
    auto bytes = encode_model(model);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

TaggerModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open model " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace cstag
