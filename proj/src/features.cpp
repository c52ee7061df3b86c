#include "cstag/features.hpp"

#include <array>

namespace cstag {

namespace {

constexpr std::array<std::string_view, kTemplateCount> kTemplateNames = {
    "w", "shape", "pre", "suf", "ng", "pw", "nw", "lang", "prev"};

constexpr std::size_t kMaxAffix = 3;
constexpr std::size_t kMinNgram = 3;
constexpr std::size_t kMaxNgram = 5;

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

void push(std::vector<std::string>& out, FeatureTemplate t, std::string_view payload) {
  std::string key(template_name(t));
  key += kKeySeparator;
  key += payload;
  out.push_back(std::move(key));
}

bool on(const TemplateSet& s, FeatureTemplate t) { return s.test(static_cast<std::size_t>(t)); }

}  // namespace

std::string_view to_string(TaggerMode mode) {
  switch (mode) {
    case TaggerMode::Plain: return "plain";
    case TaggerMode::LangInput: return "lang-input";
    case TaggerMode::LangOutput: return "lang-output";
  }
  return "plain";
}

TaggerMode parse_mode(std::string_view text) {
  if (text == "plain") return TaggerMode::Plain;
  if (text == "lang-input") return TaggerMode::LangInput;
  if (text == "lang-output") return TaggerMode::LangOutput;
  throw Error(ErrorCode::InvalidConfig, "unknown tagger mode '" + std::string(text) + "'");
}

std::string_view template_name(FeatureTemplate t) { return kTemplateNames[static_cast<std::size_t>(t)]; }

FeatureTemplate parse_template(std::string_view name) {
  for (std::size_t i = 0; i < kTemplateNames.size(); ++i)
    if (kTemplateNames[i] == name) return static_cast<FeatureTemplate>(i);
  throw Error(ErrorCode::ParseError, "unknown feature template '" + std::string(name) + "'");
}

std::string FeatureKey::encoded() const {
  std::string key(template_name(tmpl));
  key += kKeySeparator;
  key += payload;
  return key;
}

FeatureKey FeatureKey::decode(std::string_view encoded) {
  auto sep = encoded.find(kKeySeparator);
  if (sep == std::string_view::npos) throw Error(ErrorCode::ParseError, "feature key without separator");
  return {parse_template(encoded.substr(0, sep)), std::string(encoded.substr(sep + 1))};
}

std::string lowercase(std::string_view word) {
  std::string out(word);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::string word_shape(std::string_view word) {
  std::string out;
  for (auto ch : utf8_chars(word)) {
    auto c = static_cast<unsigned char>(ch.front());
    if (c >= 'A' && c <= 'Z') out += 'X';
    else if (c >= 'a' && c <= 'z') out += 'x';
    else if (c >= '0' && c <= '9') out += 'd';
    else if (c < 0x80) out += static_cast<char>(c);
    else out += 'x';
  }
  return out;
}

std::vector<std::string_view> utf8_chars(std::string_view text) {
  std::vector<std::string_view> out;
  for (std::size_t i = 0; i < text.size();) {
    std::size_t len = utf8_length(static_cast<unsigned char>(text[i]));
    if (i + len > text.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k)
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

void append_emission_features(const Sentence& sentence, std::size_t position, TaggerMode mode,
                              const TemplateSet& templates, std::vector<std::string>& out) {
  const Token& token = sentence.tokens[position];
  const std::string lower = lowercase(token.surface);

  if (on(templates, FeatureTemplate::Word)) push(out, FeatureTemplate::Word, lower);
  if (on(templates, FeatureTemplate::Shape)) push(out, FeatureTemplate::Shape, word_shape(token.surface));

  const auto chars = utf8_chars(lower);
  auto join = [&](std::size_t from, std::size_t count) {
    std::string s;
    for (std::size_t k = from; k < from + count; ++k) s += chars[k];
    return s;
  };
  for (std::size_t len = 1; len <= kMaxAffix && len <= chars.size(); ++len) {
    if (on(templates, FeatureTemplate::Prefix)) push(out, FeatureTemplate::Prefix, join(0, len));
    if (on(templates, FeatureTemplate::Suffix)) push(out, FeatureTemplate::Suffix, join(chars.size() - len, len));
  }

  if (on(templates, FeatureTemplate::CharNgram)) {
    std::vector<std::string_view> padded;
    padded.reserve(chars.size() + 2);
    padded.push_back("<");
    padded.insert(padded.end(), chars.begin(), chars.end());
    padded.push_back(">");
    for (std::size_t n = kMinNgram; n <= kMaxNgram; ++n) {
      for (std::size_t i = 0; i + n <= padded.size(); ++i) {
        std::string gram;
        for (std::size_t k = i; k < i + n; ++k) gram += padded[k];
        push(out, FeatureTemplate::CharNgram, gram);
      }
    }
  }

  if (on(templates, FeatureTemplate::PrevWord))
    push(out, FeatureTemplate::PrevWord,
         position == 0 ? std::string(kBos) : lowercase(sentence.tokens[position - 1].surface));
  if (on(templates, FeatureTemplate::NextWord))
    push(out, FeatureTemplate::NextWord,
         position + 1 == sentence.tokens.size() ? std::string(kEos)
                                                : lowercase(sentence.tokens[position + 1].surface));

  if (mode == TaggerMode::LangInput && on(templates, FeatureTemplate::LangTag))
    push(out, FeatureTemplate::LangTag, token.lang.raw);
}

std::vector<FeatureKey> extract_features(const Sentence& sentence, std::size_t position,
                                         std::string_view prev_label, TaggerMode mode,
                                         const TemplateSet& templates) {
  std::vector<std::string> encoded;
  append_emission_features(sentence, position, mode, templates, encoded);
  std::vector<FeatureKey> keys;
  keys.reserve(encoded.size() + 1);
  for (const auto& e : encoded) keys.push_back(FeatureKey::decode(e));
  if (on(templates, FeatureTemplate::PrevLabel))
    keys.push_back({FeatureTemplate::PrevLabel, std::string(prev_label)});
  return keys;
}

}  // namespace cstag
