#include "promptpack/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "promptpack/errors.hpp"
#include "promptpack/random.hpp"

namespace promptpack {

namespace {

struct Present {
  std::vector<double> values;
  std::vector<std::size_t> rows;
};

Present present_values(const NumericColumn& column) {
  if (!column.missing.empty() && column.missing.size() != column.values.size()) {
    throw Error(ErrorCode::InvalidArgument, "column '" + column.name + "': mask length differs from values");
  }
  Present p;
  for (std::size_t i = 0; i < column.values.size(); ++i) {
    if (column.is_missing(i)) continue;
    if (!std::isfinite(column.values[i])) {
      throw Error(ErrorCode::InvalidArgument, "column '" + column.name + "': non-finite value at row " + std::to_string(i));
    }
    p.values.push_back(column.values[i]);
    p.rows.push_back(i);
  }
  if (p.values.empty()) throw Error(ErrorCode::EmptyColumn, "column '" + column.name + "' has no values");
  return p;
}

std::vector<bool> mask_of(const NumericColumn& column) {
  if (!column.missing.empty()) return column.missing;
  return std::vector<bool>(column.values.size(), false);
}

// Nearest centroid, ties to the lower index.
std::uint32_t nearest(std::span<const double> centroids, double x) {
  std::uint32_t best = 0;
  double best_d = std::abs(x - centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = std::abs(x - centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

}  // namespace

std::size_t NumericColumn::present_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < values.size(); ++i) n += is_missing(i) ? 0 : 1;
  return n;
}

double UniformQuantParams::max_error() const noexcept {
  if (max == min) return 0.0;
  return (max - min) / static_cast<double>(levels() - 1);
}

std::string QuantizedColumn::params_json() const {
  nlohmann::json j;
  if (const auto* u = std::get_if<UniformQuantParams>(&params)) {
    j = {{"type", "uniform"}, {"min", u->min}, {"max", u->max}, {"bits", u->bits}};
  } else {
    const auto& k = std::get<KMeansQuantParams>(params);
    j = {{"type", "kmeans"}, {"centroids", k.centroids}, {"seed", k.seed}};
  }
  return j.dump();
}

std::variant<UniformQuantParams, KMeansQuantParams> parse_quant_params(std::string_view json) {
  try {
    const nlohmann::json j = nlohmann::json::parse(json);
    const std::string type = j.at("type").get<std::string>();
    if (type == "uniform") {
      UniformQuantParams p{j.at("min").get<double>(), j.at("max").get<double>(), j.at("bits").get<int>()};
      if (p.bits < 1 || p.bits > kMaxBits || !(p.min <= p.max)) {
        throw Error(ErrorCode::ParseError, "quant params: invalid uniform parameters");
      }
      return p;
    }
    if (type == "kmeans") {
      KMeansQuantParams p{j.at("centroids").get<std::vector<double>>(), j.at("seed").get<std::uint64_t>()};
      if (p.centroids.empty()) throw Error(ErrorCode::ParseError, "quant params: no centroids");
      return p;
    }
    throw Error(ErrorCode::ParseError, "quant params: unknown type '" + type + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("quant params: ") + e.what());
  }
}

QuantizedColumn quantize_uniform(const NumericColumn& column, int bits) {
  if (bits < 1 || bits > kMaxBits) {
    throw Error(ErrorCode::InvalidArgument, "bit width must be in [1, 16], got " + std::to_string(bits));
  }
  const Present p = present_values(column);
  const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
  UniformQuantParams params{*lo, *hi, bits};
  const double range = params.max - params.min;
  if (!std::isfinite(range)) throw Error(ErrorCode::InvalidArgument, "column '" + column.name + "': range overflows");

  QuantizedColumn out{column.name, std::vector<std::uint32_t>(column.values.size(), 0), mask_of(column), params};
  if (range == 0.0) return out;
  const double top = static_cast<double>(params.levels() - 1);
  for (std::size_t k = 0; k < p.values.size(); ++k) {
    const double q = std::round((p.values[k] - params.min) / range * top);
    out.codes[p.rows[k]] = static_cast<std::uint32_t>(std::clamp(q, 0.0, top));
  }
  return out;
}

NumericColumn dequantize_uniform(const QuantizedColumn& column) {
  const auto* params = std::get_if<UniformQuantParams>(&column.params);
  if (params == nullptr) throw Error(ErrorCode::InvalidArgument, "dequantize_uniform: column is not uniformly quantized");
  NumericColumn out{column.name, std::vector<double>(column.codes.size(), 0.0), column.missing};
  const double range = params->max - params->min;
  const double top = static_cast<double>(params->levels() - 1);
  for (std::size_t i = 0; i < column.codes.size(); ++i) {
    if (out.is_missing(i)) continue;
    out.values[i] = range == 0.0 ? params->min : params->min + static_cast<double>(column.codes[i]) / top * range;
  }
  return out;
}

int plan_bits_for_tolerance(const NumericColumn& column, double tolerance) {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be a positive finite number");
  }
  const Present p = present_values(column);
  const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
  const double range = *hi - *lo;
  if (range == 0.0) return 1;
  for (int b = 1; b <= kMaxBits; ++b) {
    if (range / static_cast<double>((std::uint32_t{1} << b) - 1) <= tolerance) return b;
  }
  throw Error(ErrorCode::ToleranceUnreachable,
              "column '" + column.name + "': tolerance " + std::to_string(tolerance) + " needs more than 16 bits");
}

double sse_1d(std::span<const double> values, std::span<const double> centroids,
              std::span<const std::uint32_t> assignments) {
  double sse = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - centroids[assignments[i]];
    sse += d * d;
  }
  return sse;
}

std::vector<double> kmeans_pp_init_1d(std::span<const double> values, std::size_t k, std::uint64_t seed) {
  std::vector<double> centroids;
  if (values.empty() || k == 0) return centroids;
  PortableRng rng(seed);
  centroids.push_back(values[rng.uniform_index(values.size())]);
  std::vector<double> d2(values.size());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centroids) best = std::min(best, (values[i] - c) * (values[i] - c));
      d2[i] = best;
      total += best;
    }
    if (total == 0.0) break;  // fewer distinct values than k
    const double target = rng.uniform01() * total;
    double acc = 0.0;
    std::size_t pick = values.size();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (d2[i] == 0.0) continue;
      acc += d2[i];
      pick = i;
      if (acc > target) break;
    }
    centroids.push_back(values[pick]);
  }
  return centroids;
}

LloydResult lloyd_1d(std::span<const double> values, std::vector<double> centroids, std::size_t max_iterations) {
  LloydResult r;
  if (centroids.empty()) throw Error(ErrorCode::InvalidK, "lloyd_1d: no initial centroids");
  auto assign = [&](std::vector<std::uint32_t>& a) {
    a.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) a[i] = nearest(centroids, values[i]);
  };
  assign(r.assignments);
  r.sse_trace.push_back(sse_1d(values, centroids, r.assignments));

  std::vector<std::uint32_t> next;
  std::vector<double> sums(centroids.size());
  std::vector<std::size_t> counts(centroids.size());
  while (r.iterations < max_iterations) {
    ++r.iterations;
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
      sums[r.assignments[i]] += values[i];
      ++counts[r.assignments[i]];
    }
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      if (counts[c] > 0) centroids[c] = sums[c] / static_cast<double>(counts[c]);
    }
    assign(next);
    r.sse_trace.push_back(sse_1d(values, centroids, next));
    const bool stable = next == r.assignments;
    r.assignments.swap(next);
    if (stable) break;
  }
  r.centroids = std::move(centroids);
  return r;
}

QuantizedColumn quantize_kmeans(const NumericColumn& column, std::size_t k, std::uint64_t seed) {
  const Present p = present_values(column);
  std::vector<double> distinct = p.values;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (k < 1 || k > distinct.size()) {
    throw Error(ErrorCode::InvalidK, "k = " + std::to_string(k) + " outside [1, " + std::to_string(distinct.size()) +
                                         "] for column '" + column.name + "'");
  }

  LloydResult fit = lloyd_1d(p.values, kmeans_pp_init_1d(p.values, k, seed));
  std::vector<double> centroids = std::move(fit.centroids);
  std::sort(centroids.begin(), centroids.end());
  centroids.erase(std::unique(centroids.begin(), centroids.end()), centroids.end());

  QuantizedColumn out{column.name, std::vector<std::uint32_t>(column.values.size(), 0), mask_of(column),
                      KMeansQuantParams{centroids, seed}};
  for (std::size_t j = 0; j < p.values.size(); ++j) out.codes[p.rows[j]] = nearest(centroids, p.values[j]);
  return out;
}

NumericColumn dequantize_kmeans(const QuantizedColumn& column) {
  const auto* params = std::get_if<KMeansQuantParams>(&column.params);
  if (params == nullptr) throw Error(ErrorCode::InvalidArgument, "dequantize_kmeans: column is not k-means quantized");
  NumericColumn out{column.name, std::vector<double>(column.codes.size(), 0.0), column.missing};
  for (std::size_t i = 0; i < column.codes.size(); ++i) {
    if (out.is_missing(i)) continue;
    if (column.codes[i] >= params->centroids.size()) {
      throw Error(ErrorCode::InvalidArgument, "dequantize_kmeans: code out of range at row " + std::to_string(i));
    }
    out.values[i] = params->centroids[column.codes[i]];
  }
  return out;
}

NumericColumn dequantize(const QuantizedColumn& column) {
  return column.is_uniform() ? dequantize_uniform(column) : dequantize_kmeans(column);
}

}  // namespace promptpack
