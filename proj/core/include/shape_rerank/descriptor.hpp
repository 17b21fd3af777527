#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shape_rerank/point_cloud.hpp"

namespace shape_rerank {

/// Global shape descriptor: d >= 1 finite values.
class FeatureVector {
 public:
  explicit FeatureVector(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<double> values_;
};

/// Euclidean distance; throws DimensionMismatch on unequal dimensions.
double feature_distance(const FeatureVector& a, const FeatureVector& b);

/// Features keyed by model or query id, all with one dimension.
class FeatureSet {
 public:
  explicit FeatureSet(std::string source = "builtin-d2") : source_(std::move(source)) {}

  /// Throws DuplicateId or DimensionMismatch.
  void insert(std::string id, FeatureVector vector);

  std::size_t size() const noexcept { return features_.size(); }
  bool empty() const noexcept { return features_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::string& source() const noexcept { return source_; }
  const std::map<std::string, FeatureVector>& features() const noexcept { return features_; }
  const FeatureVector* find(const std::string& id) const;
  const FeatureVector& at(const std::string& id) const;

 private:
  std::string source_;
  std::size_t dim_ = 0;
  std::map<std::string, FeatureVector> features_;
};

struct D2Options {
  std::size_t bins = 64;
  std::size_t pairs = 4096;
  std::uint64_t seed = 0x5eedd2ULL;
};

/// D2 shape distribution: histogram of distances between `pairs` randomly
/// drawn pairs of distinct point indices, binned uniformly on [0, 2] and
/// normalized to sum 1. The top bin is closed on the right; distances above
/// 2 (clouds that are not unit-radius) also land in it.
FeatureVector compute_d2(const PointCloud& cloud, std::size_t bins, std::size_t pairs, std::uint64_t seed);
inline FeatureVector compute_d2(const PointCloud& cloud, const D2Options& options = {}) {
  return compute_d2(cloud, options.bins, options.pairs, options.seed);
}

// Feature files hold one `<id> <v1> ... <vd>` record per line; '#' starts a
// comment line. The dimension is taken from the first record.
FeatureSet read_features(std::istream& in, std::optional<std::size_t> expected_dim = std::nullopt,
                         std::string source_tag = "external", std::string_view source = "<stream>");
FeatureSet load_features(const std::filesystem::path& path, std::optional<std::size_t> expected_dim = std::nullopt);
void write_features(std::ostream& out, const FeatureSet& features);
void save_features(const std::filesystem::path& path, const FeatureSet& features);

}  // namespace shape_rerank
