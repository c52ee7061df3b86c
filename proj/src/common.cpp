#include "cstag/error.hpp"
#include "cstag/rng.hpp"

#include <algorithm>
#include <limits>

namespace cstag {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::UnknownLanguageTag: return "UnknownLanguageTag";
    case ErrorCode::InvalidBioSequence: return "InvalidBioSequence";
    case ErrorCode::InvalidToken: return "InvalidToken";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::UnlabeledGold: return "UnlabeledGold";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TaskMismatch: return "TaskMismatch";
    case ErrorCode::DuplicateSentenceId: return "DuplicateSentenceId";
    case ErrorCode::OverlappingSentences: return "OverlappingSentences";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::InvalidFractions: return "InvalidFractions";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NoSwitchPoints: return "NoSwitchPoints";
    case ErrorCode::NoEligibleSentences: return "NoEligibleSentences";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

bool is_data_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine:
    case ErrorCode::UnknownLanguageTag:
    case ErrorCode::InvalidBioSequence:
    case ErrorCode::InvalidToken:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::UnlabeledGold:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::TaskMismatch:
    case ErrorCode::DuplicateSentenceId:
    case ErrorCode::OverlappingSentences:
    case ErrorCode::VersionMismatch:
    case ErrorCode::ParseError:
      return true;
    default:
      return false;
  }
}

std::size_t Rng::uniform_index(std::size_t n) {
  // Rejection sampling over the largest multiple of n below 2^64.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  k = std::min(k, n);
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + uniform_index(n - i);
    std::swap(all[i], all[j]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finalizer over a combination of the inputs.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ stream) ^ index);
}

}  // namespace cstag
