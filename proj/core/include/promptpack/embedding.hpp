#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace promptpack {

using Vector = std::vector<double>;

// text -> fixed-dimension real vector. Deterministic per session.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual Vector embed(std::string_view text) const = 0;
  virtual std::size_t dimension() const noexcept = 0;
  virtual std::string name() const = 0;
};

// Signed feature hashing over lower-cased word/number tokens, L2-normalised.
// Text without any word or number token embeds to the zero vector.
class HashingEmbedder final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit HashingEmbedder(std::size_t dimension = kDefaultDimension);

  Vector embed(std::string_view text) const override;
  std::size_t dimension() const noexcept override { return dimension_; }
  std::string name() const override { return "hashing-bow"; }

 private:
  std::size_t dimension_;
};

}  // namespace promptpack
