#include "promptpack/errors.hpp"

#include "promptpack/hashing.hpp"

#include <array>

namespace promptpack {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::ProviderFailure: return "ProviderFailure";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DictionaryMismatch: return "DictionaryMismatch";
    case ErrorCode::UnknownPlaceholder: return "UnknownPlaceholder";
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::ToleranceUnreachable: return "ToleranceUnreachable";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

std::string content_hash(std::string_view bytes) {
  static constexpr std::array<char, 16> kHex = {'0', '1', '2', '3', '4', '5', '6', '7',
                                                '8', '9', 'a', 'b', 'c', 'd', 'e', 'f'};
  std::uint64_t h = fnv1a64(bytes);
  std::string out = "fnv1a64:0000000000000000";
  for (std::size_t i = 0; i < 16; ++i) {
    out[out.size() - 1 - i] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace promptpack
