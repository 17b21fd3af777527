#include "shape_rerank/kd_tree3.hpp"

#include <algorithm>
#include <limits>

#include "shape_rerank/errors.hpp"

namespace shape_rerank {

SpatialIndex::SpatialIndex(const PointCloud& target, std::size_t leaf_size)
    : leaf_size_(std::max<std::size_t>(1, leaf_size)),
      points_(target.points().begin(), target.points().end()) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorKind::InvalidArgument, "spatial index supports fewer than 2^32 points");
  }
  nodes_.reserve(2 * (points_.size() / leaf_size_ + 1));
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = points_[begin];
  Vec3 hi = points_[begin];
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    const Vec3& p = points_[i];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const Vec3 extent = hi - lo;
  int axis = 0;
  if (extent.y > extent[static_cast<std::size_t>(axis)]) axis = 1;
  if (extent.z > extent[static_cast<std::size_t>(axis)]) axis = 2;
  // All points coincide: no split can separate them.
  if (extent[static_cast<std::size_t>(axis)] == 0.0) return id;

  const std::uint32_t mid = begin + (end - begin) / 2;
  const auto ax = static_cast<std::size_t>(axis);
  std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                   [ax](const Vec3& a, const Vec3& b) { return a[ax] < b[ax]; });
  const double split = points_[mid][ax];

  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void SpatialIndex::search(std::uint32_t node_id, const Vec3& query, double& best) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const double d = squared_distance(query, points_[i]);
      if (d < best) best = d;
    }
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double diff = query[static_cast<std::size_t>(node.axis)] - node.split;
  const std::uint32_t near = diff < 0.0 ? node.left : node.right;
  const std::uint32_t far = diff < 0.0 ? node.right : node.left;
  search(near, query, best);
  if (diff * diff < best) search(far, query, best);
}

double SpatialIndex::nearest_squared_distance(const Vec3& query) const {
  double best = std::numeric_limits<double>::infinity();
  search(0, query, best);
  return best;
}

double SpatialIndex::nearest_distance(const Vec3& query) const {
  return std::sqrt(nearest_squared_distance(query));
}

}  // namespace shape_rerank
