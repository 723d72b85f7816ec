#include "promptpack/embedding.hpp"

#include <cmath>

#include "promptpack/errors.hpp"
#include "promptpack/hashing.hpp"
#include "promptpack/lexicon.hpp"

namespace promptpack {

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be positive");
}

Vector HashingEmbedder::embed(std::string_view text) const {
  Vector v(dimension_, 0.0);
  const TokenStream stream = tokenize(std::string(text));
  std::string lowered;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (!stream[i].is_lexical()) continue;
    lowered.assign(stream.surface(i));
    for (char& c : lowered) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    const std::uint64_t h = fnv1a64(lowered);
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    v[static_cast<std::size_t>(h % dimension_)] += sign;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

}  // namespace promptpack
