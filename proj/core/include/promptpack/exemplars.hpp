#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "promptpack/embedding.hpp"

namespace promptpack {

// Dense row-major n x d matrix with one item id per row.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols);
  // Throws Error{DimensionMismatch} when rows differ in length.
  static FeatureMatrix from_rows(const std::vector<Vector>& rows, std::vector<std::string> item_ids = {});

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }
  // Row index as a string when no ids were supplied.
  std::string item_id(std::size_t r) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
  std::vector<std::string> item_ids_;
};

double euclidean_distance(std::span<const double> a, std::span<const double> b);

// Per-column zero mean, unit population variance; constant columns become
// zeros. Throws Error{TooFewRows} for fewer than two rows.
FeatureMatrix standardize(const FeatureMatrix& matrix);

struct ClusteringResult {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // per row, in [0, k)
  std::vector<Vector> centroids;
  double silhouette = 0.0;
  std::vector<double> silhouette_by_k;  // filled by select_k_by_silhouette, index = k - k_min
  std::size_t k_min = 0;
};

// k-means++ seeding + Lloyd (<= 300 iterations). Clusters never end empty:
// an emptied cluster takes the point farthest from its own centroid. Throws
// Error{InvalidK} unless 1 <= k <= rows.
ClusteringResult kmeans(const FeatureMatrix& matrix, std::size_t k, std::uint64_t seed);

// Mean over points of (b - a) / max(a, b) with Euclidean distances; points in
// singleton clusters score 0, as do points with a == b == 0. Labels may be
// any integers. Throws Error{SingleCluster} for fewer than two clusters.
double silhouette_score(const FeatureMatrix& matrix, std::span<const std::size_t> assignments);

struct KRange {
  std::size_t k_min = 5;
  std::size_t k_max = 50;
};

// Effective sweep for n rows: [max(2, k_min), min(k_max, n - 1)], except that
// when k_max had to be lowered to n - 1 the sweep starts at 2. Throws
// Error{TooFewRows} for n < 3.
KRange clamp_k_range(KRange requested, std::size_t rows);

// Runs kmeans for every k in the clamped range (seeded by `seed`) and keeps
// the best silhouette; ties go to the smallest k.
ClusteringResult select_k_by_silhouette(const FeatureMatrix& matrix, KRange range, std::uint64_t seed);

// Per cluster, the row nearest its centroid (ties to the lowest row).
// Entry c is the prototype row of cluster c.
std::vector<std::size_t> select_prototypes(const FeatureMatrix& matrix, const ClusteringResult& result);

enum class ExemplarMode { Off, Random, Representative };

struct ExemplarOptions {
  ExemplarMode mode = ExemplarMode::Off;
  std::size_t count = 3;
  std::uint64_t seed = 42;
  KRange k_range{};
};

struct SelectedExemplar {
  std::size_t item = 0;              // index into the pool
  std::optional<std::size_t> cluster;  // set in representative mode
};

// Chooses options.count items from pool (all of them when the pool is not
// larger). Representative mode embeds, standardizes, picks k by silhouette
// and takes the prototypes of the `count` largest clusters (ties to the lower
// cluster id); if k* < count the remaining slots go to the next-nearest
// members, cluster by cluster. Random mode is a seeded uniform draw. The
// result is ordered by pool index.
std::vector<SelectedExemplar> choose_exemplars(std::span<const std::string> pool, const EmbeddingProvider& embedder,
                                               const ExemplarOptions& options);

// JSON list [{itemId, text, clusterId}]; clusterId is null in random mode.
std::string exemplars_to_json(std::span<const SelectedExemplar> selected, std::span<const std::string> pool);

}  // namespace promptpack
