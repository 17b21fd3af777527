#include "shape_rerank/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "shape_rerank/errors.hpp"
#include "shape_rerank/parallel.hpp"

namespace shape_rerank {
namespace {

enum class Family { Box, Cylinder, Ellipsoid, LShape };

constexpr std::array<const char*, 4> kFamilyNames{"box", "cylinder", "ellipsoid", "lshape"};

struct ShapeParams {
  Family family;
  Vec3 size;               // half-extents or radii
  double thickness = 0.3;  // L-shape arm thickness as a fraction of the extent
};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Vec3 random_direction(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Vec3 v{n(rng), n(rng), n(rng)};
    const double len = std::sqrt(squared_norm(v));
    if (len > 1e-12) return v * (1.0 / len);
  }
}

struct AxisBox {
  Vec3 lo;
  Vec3 hi;

  double face_area(std::size_t axis) const {
    const Vec3 e = hi - lo;
    return axis == 0 ? e.y * e.z : (axis == 1 ? e.x * e.z : e.x * e.y);
  }
  double area() const { return 2.0 * (face_area(0) + face_area(1) + face_area(2)); }
  bool strictly_inside(const Vec3& p) const {
    return p.x > lo.x && p.x < hi.x && p.y > lo.y && p.y < hi.y && p.z > lo.z && p.z < hi.z;
  }
};

Vec3 sample_box_surface(const AxisBox& box, Rng& rng) {
  const double a0 = box.face_area(0);
  const double a1 = box.face_area(1);
  const double a2 = box.face_area(2);
  const double pick = uniform(rng, 0.0, a0 + a1 + a2);
  const std::size_t axis = pick < a0 ? 0 : (pick < a0 + a1 ? 1 : 2);
  const bool high = uniform(rng, 0.0, 1.0) < 0.5;
  double c[3] = {uniform(rng, box.lo.x, box.hi.x), uniform(rng, box.lo.y, box.hi.y), uniform(rng, box.lo.z, box.hi.z)};
  c[axis] = high ? box.hi[axis] : box.lo[axis];
  return {c[0], c[1], c[2]};
}

Vec3 sample_surface(const ShapeParams& shape, Rng& rng) {
  const Vec3& s = shape.size;
  switch (shape.family) {
    case Family::Box:
      return sample_box_surface(AxisBox{s * -1.0, s}, rng);
    case Family::Cylinder: {
      // Elliptic cylinder along z: choose side or cap by approximate area.
      const double perimeter = std::numbers::pi * (3.0 * (s.x + s.y) - std::sqrt((3.0 * s.x + s.y) * (s.x + 3.0 * s.y)));
      const double side = perimeter * 2.0 * s.z;
      const double cap = std::numbers::pi * s.x * s.y;
      const double pick = uniform(rng, 0.0, side + 2.0 * cap);
      const double theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      if (pick < side) return {s.x * std::cos(theta), s.y * std::sin(theta), uniform(rng, -s.z, s.z)};
      const double r = std::sqrt(uniform(rng, 0.0, 1.0));
      return {s.x * r * std::cos(theta), s.y * r * std::sin(theta), pick < side + cap ? s.z : -s.z};
    }
    case Family::Ellipsoid: {
      const Vec3 d = random_direction(rng);
      return {d.x * s.x, d.y * s.y, d.z * s.z};
    }
    case Family::LShape: {
      const AxisBox upright{{-s.x, -s.y, -s.z}, {-s.x + 2.0 * shape.thickness * s.x, s.y, s.z}};
      const AxisBox base{{-s.x, -s.y, -s.z}, {s.x, s.y, -s.z + 2.0 * shape.thickness * s.z}};
      const double a_upright = upright.area();
      const double a_base = base.area();
      for (;;) {
        const bool first = uniform(rng, 0.0, a_upright + a_base) < a_upright;
        const Vec3 p = sample_box_surface(first ? upright : base, rng);
        if (!(first ? base : upright).strictly_inside(p)) return p;
      }
    }
  }
  return {};
}

ShapeParams class_base(std::size_t class_index) {
  const auto family = static_cast<Family>(class_index % 4);
  const std::size_t variant = class_index / 4;
  ShapeParams base{family, {}};
  switch (family) {
    case Family::Box: base.size = {1.0, 0.6, 0.4}; break;
    case Family::Cylinder: base.size = {0.5, 0.5, 1.0}; break;
    case Family::Ellipsoid: base.size = {1.0, 0.6, 0.5}; break;
    case Family::LShape: base.size = {1.0, 0.5, 0.8}; break;
  }
  // Further classes of the same family stretch one axis.
  if (variant > 0) {
    const double stretch = 1.0 + 0.35 * static_cast<double>(variant);
    switch (variant % 3) {
      case 0: base.size.x *= stretch; break;
      case 1: base.size.y *= stretch; break;
      default: base.size.z *= stretch; break;
    }
  }
  return base;
}

std::string class_label(std::size_t class_index) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "c%02zu_%s", class_index, kFamilyNames[class_index % 4]);
  return buf;
}

std::string numbered(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%04zu", prefix, i);
  return buf;
}

PointCloud make_model(const SyntheticSpec& spec, std::size_t index, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 2 * index));
  ShapeParams shape = class_base(index % spec.classes);
  const double j = spec.instance_jitter;
  shape.size = {shape.size.x * uniform(rng, 1.0 - j, 1.0 + j), shape.size.y * uniform(rng, 1.0 - j, 1.0 + j),
                shape.size.z * uniform(rng, 1.0 - j, 1.0 + j)};
  shape.thickness *= uniform(rng, 1.0 - j, 1.0 + j);
  shape.thickness = std::clamp(shape.thickness, 0.05, 0.5);

  std::vector<Vec3> points(spec.points_per_model);
  for (auto& p : points) p = sample_surface(shape, rng);
  return normalize(PointCloud(numbered('m', index), std::move(points)));
}

PointCloud make_query(const SyntheticSpec& spec, const PointCloud& source, std::size_t index, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 2 * index + 1));
  std::vector<Vec3> points(source.points().begin(), source.points().end());

  if (spec.crop_fraction > 0.0) {
    const Vec3 dir = random_direction(rng);
    std::vector<std::pair<double, std::size_t>> proj(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Vec3& p = points[i];
      proj[i] = {p.x * dir.x + p.y * dir.y + p.z * dir.z, i};
    }
    std::sort(proj.begin(), proj.end());
    const auto removed = static_cast<std::size_t>(std::llround(spec.crop_fraction * static_cast<double>(points.size())));
    const std::size_t kept = std::max<std::size_t>(1, points.size() - std::min(removed, points.size()));
    std::vector<std::size_t> keep;
    keep.reserve(kept);
    for (std::size_t i = 0; i < kept; ++i) keep.push_back(proj[i].second);
    std::sort(keep.begin(), keep.end());
    std::vector<Vec3> cropped;
    cropped.reserve(kept);
    for (std::size_t i : keep) cropped.push_back(points[i]);
    points = std::move(cropped);
  }

  if (spec.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (auto& p : points) p = p + Vec3{noise(rng), noise(rng), noise(rng)};
  }

  const auto outliers =
      static_cast<std::size_t>(std::llround(spec.outlier_fraction * static_cast<double>(points.size())));
  for (std::size_t i = 0; i < outliers; ++i) {
    points.push_back({uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)});
  }
  return PointCloud(numbered('q', index), std::move(points));
}

}  // namespace

void SyntheticSpec::validate() const {
  auto reject = [](const std::string& why) { fail(ErrorKind::InvalidSpec, why); };
  if (models < 2) reject("need at least 2 models");
  if (classes < 1) reject("need at least 1 class");
  if (classes > models) reject("more classes than models");
  if (queries < 1) reject("need at least 1 query");
  if (points_per_model < 16) reject("need at least 16 points per model");
  if (!(crop_fraction >= 0.0 && crop_fraction <= kMaxCropFraction)) reject("crop fraction must be in [0, 0.9]");
  if (!(noise_sigma >= 0.0 && std::isfinite(noise_sigma))) reject("noise sigma must be finite and >= 0");
  if (!(outlier_fraction >= 0.0 && outlier_fraction <= kMaxOutlierFraction)) {
    reject("outlier fraction must be in [0, 0.2]");
  }
  if (!(instance_jitter >= 0.0 && instance_jitter < 0.9)) reject("instance jitter must be in [0, 0.9)");
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  SyntheticDataset out;
  for (std::size_t i = 0; i < spec.models; ++i) {
    out.database.add(make_model(spec, i, seed), class_label(i % spec.classes));
  }
  Rng pick(mix_seed(seed, ~std::uint64_t{0}));
  std::uniform_int_distribution<std::size_t> which(0, spec.models - 1);
  for (std::size_t q = 0; q < spec.queries; ++q) {
    const std::size_t source = which(pick);
    const std::string model_id = numbered('m', source);
    auto query = make_query(spec, out.database.cloud(model_id), q, seed);
    out.ground_truth.add(query.id(), model_id, out.database.category(model_id));
    out.queries.push_back(std::move(query));
  }
  return out;
}

}  // namespace shape_rerank
