#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "shape_rerank/database.hpp"
#include "shape_rerank/eval.hpp"
#include "shape_rerank/point_cloud.hpp"

namespace shape_rerank {

/// Parameters of a procedural retrieval benchmark.
///
/// Models are surface samples of boxes, elliptic cylinders, ellipsoids and
/// L-shapes; class c uses family c % 4 with class-specific base proportions,
/// and every instance jitters each dimension by a factor in
/// [1 - instance_jitter, 1 + instance_jitter]. Models are normalized to unit
/// radius. A query takes its source model's points, removes the
/// crop_fraction of them lying furthest along a random direction, adds
/// isotropic Gaussian noise and then uniform outliers in [-1, 1]^3
/// (outlier_fraction times the remaining point count). Queries stay in the
/// model frame, i.e. they are already aligned with their source.
struct SyntheticSpec {
  std::size_t models = 200;
  std::size_t classes = 4;
  std::size_t queries = 50;
  std::size_t points_per_model = 2048;
  double crop_fraction = 0.3;
  double noise_sigma = 0.01;
  double outlier_fraction = 0.0;
  double instance_jitter = 0.25;

  static constexpr double kMaxOutlierFraction = 0.2;
  static constexpr double kMaxCropFraction = 0.9;

  /// Throws InvalidSpec.
  void validate() const;
};

struct SyntheticDataset {
  Database database;
  std::vector<PointCloud> queries;
  GroundTruth ground_truth;
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace shape_rerank
