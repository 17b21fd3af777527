#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "shape_rerank/database.hpp"
#include "shape_rerank/descriptor.hpp"
#include "shape_rerank/feature_index.hpp"
#include "shape_rerank_cli/manifest.hpp"

namespace shape_rerank::cli {

/// Preprocessing shared by a database and every query run against it.
struct StoreSettings {
  std::size_t working_resolution = kDefaultWorkingResolution;
  std::size_t min_points = kDefaultMinPoints;
  std::uint64_t seed = 0;
  std::string descriptor = "builtin-d2";  // or "external:<name>"
  D2Options d2;

  bool builtin_descriptor() const { return descriptor == "builtin-d2"; }
};

/// Models: normalize, then downsample to the working resolution with a
/// per-id seed.
PointCloud prepare_model(const PointCloud& raw, const StoreSettings& settings);
/// Queries are taken as aligned to the database frame and only normalized
/// on request.
PointCloud prepare_query(const PointCloud& raw, const StoreSettings& settings, bool normalize_query);

/// A built database directory:
///   database.json      settings, model list, skipped models
///   clouds/NNNNNN.xyz  prepared model clouds
///   features.txt       one feature record per model
///   features.srnk      feature index
struct Store {
  StoreSettings settings;
  Database database;
  FeatureSet features;
  std::unique_ptr<FeatureIndex> index;
  std::vector<std::string> skipped;  // model ids dropped for having too few points
};

struct BuildSummary {
  std::size_t models = 0;
  std::size_t skipped = 0;
  std::size_t dim = 0;
  bool kd_tree = false;
  double seconds = 0.0;
};

/// Uses the manifest's database feature file when present, else builtin D2.
BuildSummary build_store(const Manifest& manifest, const std::filesystem::path& out_dir,
                         const StoreSettings& settings, unsigned threads = 0);
Store load_store(const std::filesystem::path& db_dir);

}  // namespace shape_rerank::cli
