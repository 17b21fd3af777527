#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "shape_rerank/kd_tree3.hpp"
#include "shape_rerank/point_cloud.hpp"

namespace shape_rerank {

/// Point-set distances used for geometric re-ranking.
///   cd   - two-sided mean of squared nearest-neighbor distances
///   scd  - source-to-target half of cd
///   mscd - mean of unsquared source-to-target nearest-neighbor distances
enum class Metric { Cd, Scd, Mscd };

std::string_view to_string(Metric metric);
std::optional<Metric> parse_metric(std::string_view name);

/// Nearest-neighbor search backend. BruteForce is the O(|P||Q|) reference.
enum class Backend { KdTree, BruteForce };

/// Entry i is the Euclidean distance from source point i to its nearest
/// target point.
struct DistanceVector {
  std::vector<double> entries;

  std::size_t size() const noexcept { return entries.size(); }
};

DistanceVector nn_distances(const PointCloud& source, const SpatialIndex& target, unsigned threads = 1);
DistanceVector nn_distances_brute(const PointCloud& source, const PointCloud& target);

// Sums are accumulated in fixed 1024-point chunks reduced in chunk order, so
// every result is bitwise independent of `threads`.

double chamfer(const PointCloud& p, const PointCloud& q, Backend backend = Backend::KdTree, unsigned threads = 1);
double scd(const PointCloud& p, const PointCloud& q, Backend backend = Backend::KdTree, unsigned threads = 1);
double mscd(const PointCloud& p, const PointCloud& q, Backend backend = Backend::KdTree, unsigned threads = 1);

// Prebuilt-index variants used by re-ranking, where the target index is cached.
double scd(const PointCloud& p, const SpatialIndex& q_index, unsigned threads = 1);
double mscd(const PointCloud& p, const SpatialIndex& q_index, unsigned threads = 1);
double chamfer(const PointCloud& p, const SpatialIndex& p_index, const PointCloud& q, const SpatialIndex& q_index,
               unsigned threads = 1);

double point_set_distance(Metric metric, const PointCloud& p, const PointCloud& q,
                          Backend backend = Backend::KdTree, unsigned threads = 1);

}  // namespace shape_rerank
