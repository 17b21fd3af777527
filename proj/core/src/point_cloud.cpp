#include "shape_rerank/point_cloud.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "shape_rerank/errors.hpp"

namespace shape_rerank {

PointCloud::PointCloud(std::string id, std::vector<Vec3> points)
    : id_(std::move(id)), points_(std::move(points)) {
  if (points_.empty()) fail(ErrorKind::EmptyCloud, "cloud '" + id_ + "' has no points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!is_finite(points_[i])) {
      fail(ErrorKind::NonFiniteCoordinate,
           "cloud '" + id_ + "' point " + std::to_string(i) + " is not finite");
    }
  }
}

Vec3 PointCloud::centroid() const {
  Vec3 sum;
  for (const auto& p : points_) sum = sum + p;
  return sum * (1.0 / static_cast<double>(points_.size()));
}

double PointCloud::max_norm() const {
  double best = 0.0;
  for (const auto& p : points_) best = std::max(best, squared_norm(p));
  return std::sqrt(best);
}

PointCloud normalize(const PointCloud& cloud) {
  const Vec3 center = cloud.centroid();
  std::vector<Vec3> shifted;
  shifted.reserve(cloud.size());
  double radius_sq = 0.0;
  for (const auto& p : cloud.points()) {
    shifted.push_back(p - center);
    radius_sq = std::max(radius_sq, squared_norm(shifted.back()));
  }
  const double radius = std::sqrt(radius_sq);
  if (!(radius > 0.0) || !std::isfinite(1.0 / radius)) {
    fail(ErrorKind::DegenerateCloud, "cloud '" + cloud.id() + "' has zero extent");
  }
  const double scale = 1.0 / radius;
  for (auto& p : shifted) p = p * scale;

  // The centroid of the scaled cloud carries rounding error of order
  // ulp(1) * |c| / radius; one more centering pass brings it back below 1e-15.
  PointCloud once(cloud.id(), std::move(shifted));
  const Vec3 residual = once.centroid();
  std::vector<Vec3> out(once.points().begin(), once.points().end());
  for (auto& p : out) p = p - residual;
  return PointCloud(cloud.id(), std::move(out));
}

PointCloud downsample(const PointCloud& cloud, std::size_t target, std::uint64_t seed) {
  if (target == 0) fail(ErrorKind::InvalidArgument, "downsample target must be >= 1");
  if (cloud.size() <= target) return cloud;

  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first `target` slots become a uniform subset.
  for (std::size_t i = 0; i < target; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(target);
  std::sort(order.begin(), order.end());

  std::vector<Vec3> points;
  points.reserve(target);
  for (std::size_t i : order) points.push_back(cloud[i]);
  return PointCloud(cloud.id(), std::move(points));
}

}  // namespace shape_rerank
