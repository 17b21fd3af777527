#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "shape_rerank/point_cloud.hpp"

namespace shape_rerank {

/// Exact 1-nearest-neighbor index over one point cloud.
///
/// Balanced kd-tree: each inner node splits its range at the median of the
/// widest bounding-box axis; ranges of at most `leaf_size` points become
/// leaves. Queries descend to the nearer child first and visit the far child
/// only when the splitting plane is strictly closer than the best distance
/// found so far. Pruning never discards a point that could improve the
/// answer, so results equal a linear scan bit-for-bit.
class SpatialIndex {
 public:
  static constexpr std::size_t kDefaultLeafSize = 16;

  explicit SpatialIndex(const PointCloud& target, std::size_t leaf_size = kDefaultLeafSize);

  double nearest_squared_distance(const Vec3& query) const;
  double nearest_distance(const Vec3& query) const;

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t axis = -1;  // -1 marks a leaf
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double split = 0.0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const Vec3& query, double& best) const;

  std::size_t leaf_size_;
  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
};

}  // namespace shape_rerank
