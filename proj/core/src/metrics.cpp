#include "shape_rerank/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shape_rerank/errors.hpp"
#include "shape_rerank/parallel.hpp"

namespace shape_rerank {
namespace {

constexpr std::size_t kChunk = 1024;

struct Sums {
  double linear = 0.0;   // sum of distances
  double squared = 0.0;  // sum of squared distances
};

template <class NearestSq>
Sums accumulate(const PointCloud& source, NearestSq nearest_sq, unsigned threads) {
  const std::size_t n = source.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Sums> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    Sums s;
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const double sq = nearest_sq(source[i]);
      s.squared += sq;
      s.linear += std::sqrt(sq);
    }
    partial[c] = s;
  });
  Sums total;
  for (const auto& s : partial) {
    total.linear += s.linear;
    total.squared += s.squared;
  }
  return total;
}

Sums accumulate(const PointCloud& source, const SpatialIndex& index, unsigned threads) {
  return accumulate(source, [&index](const Vec3& p) { return index.nearest_squared_distance(p); }, threads);
}

Sums accumulate_brute(const PointCloud& source, const PointCloud& target) {
  auto scan = [&target](const Vec3& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : target.points()) best = std::min(best, squared_distance(p, q));
    return best;
  };
  return accumulate(source, scan, 1);
}

double mean(double sum, const PointCloud& cloud) { return sum / static_cast<double>(cloud.size()); }

}  // namespace

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::Cd: return "cd";
    case Metric::Scd: return "scd";
    case Metric::Mscd: return "mscd";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view name) {
  if (name == "cd") return Metric::Cd;
  if (name == "scd") return Metric::Scd;
  if (name == "mscd") return Metric::Mscd;
  return std::nullopt;
}

DistanceVector nn_distances(const PointCloud& source, const SpatialIndex& target, unsigned threads) {
  DistanceVector out;
  out.entries.resize(source.size());
  const std::size_t chunks = (source.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(source.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) out.entries[i] = target.nearest_distance(source[i]);
  });
  return out;
}

DistanceVector nn_distances_brute(const PointCloud& source, const PointCloud& target) {
  DistanceVector out;
  out.entries.reserve(source.size());
  for (const auto& p : source.points()) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : target.points()) best = std::min(best, squared_distance(p, q));
    out.entries.push_back(std::sqrt(best));
  }
  return out;
}

double scd(const PointCloud& p, const SpatialIndex& q_index, unsigned threads) {
  return mean(accumulate(p, q_index, threads).squared, p);
}

double mscd(const PointCloud& p, const SpatialIndex& q_index, unsigned threads) {
  return mean(accumulate(p, q_index, threads).linear, p);
}

double chamfer(const PointCloud& p, const SpatialIndex& p_index, const PointCloud& q, const SpatialIndex& q_index,
               unsigned threads) {
  return mean(accumulate(p, q_index, threads).squared, p) + mean(accumulate(q, p_index, threads).squared, q);
}

double chamfer(const PointCloud& p, const PointCloud& q, Backend backend, unsigned threads) {
  if (backend == Backend::BruteForce) {
    return mean(accumulate_brute(p, q).squared, p) + mean(accumulate_brute(q, p).squared, q);
  }
  return chamfer(p, SpatialIndex(p), q, SpatialIndex(q), threads);
}

double scd(const PointCloud& p, const PointCloud& q, Backend backend, unsigned threads) {
  if (backend == Backend::BruteForce) return mean(accumulate_brute(p, q).squared, p);
  return scd(p, SpatialIndex(q), threads);
}

double mscd(const PointCloud& p, const PointCloud& q, Backend backend, unsigned threads) {
  if (backend == Backend::BruteForce) return mean(accumulate_brute(p, q).linear, p);
  return mscd(p, SpatialIndex(q), threads);
}

double point_set_distance(Metric metric, const PointCloud& p, const PointCloud& q, Backend backend,
                          unsigned threads) {
  switch (metric) {
    case Metric::Cd: return chamfer(p, q, backend, threads);
    case Metric::Scd: return scd(p, q, backend, threads);
    case Metric::Mscd: return mscd(p, q, backend, threads);
  }
  fail(ErrorKind::InvalidArgument, "unknown metric");
}

}  // namespace shape_rerank
