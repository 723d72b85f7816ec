#include "promptpack/exemplars.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "json.hpp"
#include "promptpack/errors.hpp"
#include "promptpack/random.hpp"

namespace promptpack {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<Vector>& rows, std::vector<std::string> item_ids) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  FeatureMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw Error(ErrorCode::DimensionMismatch, "feature matrix: row " + std::to_string(r) + " has " +
                                                    std::to_string(rows[r].size()) + " columns, expected " +
                                                    std::to_string(cols));
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  if (!item_ids.empty() && item_ids.size() != rows.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature matrix: item id count differs from row count");
  }
  m.item_ids_ = std::move(item_ids);
  return m;
}

std::string FeatureMatrix::item_id(std::size_t r) const {
  return item_ids_.empty() ? std::to_string(r) : item_ids_[r];
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

FeatureMatrix standardize(const FeatureMatrix& matrix) {
  const std::size_t n = matrix.rows();
  if (n < 2) throw Error(ErrorCode::TooFewRows, "standardize: need at least 2 rows, got " + std::to_string(n));
  FeatureMatrix out = matrix;
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += matrix.at(r, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = matrix.at(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    // Columns whose spread is pure rounding noise count as constant.
    const bool constant = !(sd > 1e-12 * std::max(1.0, std::abs(mean)));
    for (std::size_t r = 0; r < n; ++r) {
      out.at(r, c) = constant ? 0.0 : (matrix.at(r, c) - mean) / sd;
    }
  }
  return out;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t nearest_centroid(std::span<const double> x, const std::vector<Vector>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(x, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<Vector> kmeans_pp_init(const FeatureMatrix& m, std::size_t k, PortableRng& rng) {
  const std::size_t n = m.rows();
  std::vector<Vector> centroids;
  const auto first = m.row(rng.uniform_index(n));
  centroids.emplace_back(first.begin(), first.end());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(m.row(i), centroids.back()));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total == 0.0) {
      pick = rng.uniform_index(n);
    } else {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] == 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    }
    const auto row = m.row(pick);
    centroids.emplace_back(row.begin(), row.end());
  }
  return centroids;
}

// Moves the point farthest from its centroid into each empty cluster.
bool repair_empty_clusters(const FeatureMatrix& m, std::vector<std::size_t>& assign, std::vector<Vector>& centroids) {
  bool changed = false;
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    std::vector<std::size_t> sizes(centroids.size(), 0);
    for (std::size_t a : assign) ++sizes[a];
    if (sizes[c] > 0) continue;
    std::size_t far = m.rows();
    double far_d = -1.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (sizes[assign[i]] < 2) continue;
      const double d = squared_distance(m.row(i), centroids[assign[i]]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == m.rows()) continue;
    assign[far] = c;
    const auto row = m.row(far);
    centroids[c].assign(row.begin(), row.end());
    changed = true;
  }
  return changed;
}

void recompute_centroids(const FeatureMatrix& m, const std::vector<std::size_t>& assign, std::vector<Vector>& centroids) {
  std::vector<Vector> sums(centroids.size(), Vector(m.cols(), 0.0));
  std::vector<std::size_t> counts(centroids.size(), 0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t d = 0; d < m.cols(); ++d) sums[assign[i]][d] += row[d];
    ++counts[assign[i]];
  }
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t d = 0; d < m.cols(); ++d) centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
  }
}

}  // namespace

ClusteringResult kmeans(const FeatureMatrix& matrix, std::size_t k, std::uint64_t seed) {
  const std::size_t n = matrix.rows();
  if (k < 1 || k > n) {
    throw Error(ErrorCode::InvalidK, "kmeans: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  PortableRng rng(seed);
  ClusteringResult r;
  r.k = k;
  r.centroids = kmeans_pp_init(matrix, k, rng);
  r.assignments.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) r.assignments[i] = nearest_centroid(matrix.row(i), r.centroids);

  for (std::size_t iter = 0; iter < 300; ++iter) {
    repair_empty_clusters(matrix, r.assignments, r.centroids);
    recompute_centroids(matrix, r.assignments, r.centroids);
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest_centroid(matrix.row(i), r.centroids);
      if (c != r.assignments[i]) {
        r.assignments[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
  }
  if (repair_empty_clusters(matrix, r.assignments, r.centroids)) {
    recompute_centroids(matrix, r.assignments, r.centroids);
  }
  return r;
}

double silhouette_score(const FeatureMatrix& matrix, std::span<const std::size_t> assignments) {
  const std::size_t n = matrix.rows();
  if (assignments.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "silhouette: one label per row required");
  }
  std::map<std::size_t, std::size_t> dense;
  for (std::size_t label : assignments) dense.emplace(label, dense.size());
  if (dense.size() < 2) throw Error(ErrorCode::SingleCluster, "silhouette: need at least two clusters");

  const std::size_t k = dense.size();
  std::vector<std::size_t> label(n);
  std::vector<std::size_t> size(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    label[i] = dense[assignments[i]];
    ++size[label[i]];
  }

  // dist_sum[i * k + c]: sum of distances from i to the members of cluster c.
  std::vector<double> dist_sum(n * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean_distance(matrix.row(i), matrix.row(j));
      dist_sum[i * k + label[j]] += d;
      dist_sum[j * k + label[i]] += d;
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = label[i];
    if (size[own] <= 1) continue;
    const double a = dist_sum[i * k + own] / static_cast<double>(size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own) continue;
      b = std::min(b, dist_sum[i * k + c] / static_cast<double>(size[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return std::clamp(total / static_cast<double>(n), -1.0, 1.0);
}

KRange clamp_k_range(KRange requested, std::size_t rows) {
  if (rows < 3) throw Error(ErrorCode::TooFewRows, "k selection needs at least 3 rows, got " + std::to_string(rows));
  KRange r;
  r.k_max = std::min(requested.k_max, rows - 1);
  r.k_min = requested.k_max > rows - 1 ? 2 : std::max<std::size_t>(2, requested.k_min);
  r.k_max = std::max<std::size_t>(r.k_max, 2);
  r.k_min = std::min(r.k_min, r.k_max);
  return r;
}

ClusteringResult select_k_by_silhouette(const FeatureMatrix& matrix, KRange range, std::uint64_t seed) {
  const KRange r = clamp_k_range(range, matrix.rows());
  ClusteringResult best;
  std::vector<double> scores;
  bool have = false;
  for (std::size_t k = r.k_min; k <= r.k_max; ++k) {
    ClusteringResult c = kmeans(matrix, k, seed);
    c.silhouette = silhouette_score(matrix, c.assignments);
    scores.push_back(c.silhouette);
    if (!have || c.silhouette > best.silhouette) {
      best = std::move(c);
      have = true;
    }
  }
  best.silhouette_by_k = std::move(scores);
  best.k_min = r.k_min;
  return best;
}

std::vector<std::size_t> select_prototypes(const FeatureMatrix& matrix, const ClusteringResult& result) {
  std::vector<std::size_t> proto(result.k, matrix.rows());
  std::vector<double> best(result.k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    const std::size_t c = result.assignments[i];
    const double d = euclidean_distance(matrix.row(i), result.centroids[c]);
    if (d < best[c]) {
      best[c] = d;
      proto[c] = i;
    }
  }
  return proto;
}

std::vector<SelectedExemplar> choose_exemplars(std::span<const std::string> pool, const EmbeddingProvider& embedder,
                                               const ExemplarOptions& options) {
  std::vector<SelectedExemplar> out;
  if (options.mode == ExemplarMode::Off || options.count == 0 || pool.empty()) return out;
  if (pool.size() <= options.count) {
    for (std::size_t i = 0; i < pool.size(); ++i) out.push_back({i, std::nullopt});
    return out;
  }

  if (options.mode == ExemplarMode::Random) {
    PortableRng rng(options.seed);
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < options.count; ++i) {
      std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
    }
    idx.resize(options.count);
    std::sort(idx.begin(), idx.end());
    for (std::size_t i : idx) out.push_back({i, std::nullopt});
    return out;
  }

  std::vector<Vector> rows;
  rows.reserve(pool.size());
  for (const auto& text : pool) rows.push_back(embedder.embed(text));
  const FeatureMatrix features = standardize(FeatureMatrix::from_rows(rows));
  const ClusteringResult clusters = select_k_by_silhouette(features, options.k_range, options.seed);

  // Members of every cluster, nearest to the centroid first.
  std::vector<std::vector<std::pair<double, std::size_t>>> members(clusters.k);
  for (std::size_t i = 0; i < features.rows(); ++i) {
    const std::size_t c = clusters.assignments[i];
    members[c].emplace_back(euclidean_distance(features.row(i), clusters.centroids[c]), i);
  }
  for (auto& m : members) std::sort(m.begin(), m.end());

  std::vector<std::size_t> by_size(clusters.k);
  std::iota(by_size.begin(), by_size.end(), std::size_t{0});
  std::stable_sort(by_size.begin(), by_size.end(),
                   [&](std::size_t a, std::size_t b) { return members[a].size() > members[b].size(); });

  for (std::size_t depth = 0; out.size() < options.count; ++depth) {
    bool any = false;
    for (std::size_t c : by_size) {
      if (out.size() == options.count) break;
      if (depth >= members[c].size()) continue;
      out.push_back({members[c][depth].second, c});
      any = true;
    }
    if (!any) break;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.item < b.item; });
  return out;
}

std::string exemplars_to_json(std::span<const SelectedExemplar> selected, std::span<const std::string> pool) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : selected) {
    j.push_back({{"itemId", s.item},
                 {"text", pool[s.item]},
                 {"clusterId", s.cluster ? nlohmann::json(*s.cluster) : nlohmann::json(nullptr)}});
  }
  return j.dump(2);
}

}  // namespace promptpack
