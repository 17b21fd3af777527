#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace shape_rerank {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](std::size_t axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend constexpr Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

inline double squared_norm(const Vec3& v) { return v.x * v.x + v.y * v.y + v.z * v.z; }
inline double squared_distance(const Vec3& a, const Vec3& b) { return squared_norm(a - b); }
inline double distance(const Vec3& a, const Vec3& b) { return std::sqrt(squared_distance(a, b)); }
inline bool is_finite(const Vec3& v) { return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z); }

/// An ordered, non-empty set of finite 3D points with an identifier.
/// Immutable after construction; the constructor enforces the invariants.
class PointCloud {
 public:
  PointCloud(std::string id, std::vector<Vec3> points);

  const std::string& id() const noexcept { return id_; }
  std::span<const Vec3> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }

  Vec3 centroid() const;
  double max_norm() const;

  PointCloud with_id(std::string id) const { return PointCloud(std::move(id), points_); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::string id_;
  std::vector<Vec3> points_;
};

/// Centers on the centroid, then scales so the farthest point has norm 1.
/// Throws DegenerateCloud when every point coincides.
PointCloud normalize(const PointCloud& cloud);

/// Uniform random subset of exactly `target` points, kept in input order.
/// Returns the cloud unchanged when it already has at most `target` points.
PointCloud downsample(const PointCloud& cloud, std::size_t target, std::uint64_t seed);

inline constexpr std::size_t kDefaultWorkingResolution = 2048;
inline constexpr std::size_t kDefaultMinPoints = 64;

}  // namespace shape_rerank
