#include "shape_rerank/descriptor.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "shape_rerank/errors.hpp"
#include "shape_rerank/point_cloud_io.hpp"

namespace shape_rerank {

FeatureVector::FeatureVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) fail(ErrorKind::InvalidArgument, "feature vector must have at least one entry");
  for (double v : values_) {
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteCoordinate, "feature vector has a non-finite entry");
  }
}

double feature_distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.dim() != b.dim()) {
    fail(ErrorKind::DimensionMismatch,
         "feature dimensions differ: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

void FeatureSet::insert(std::string id, FeatureVector vector) {
  if (features_.empty()) {
    dim_ = vector.dim();
  } else if (vector.dim() != dim_) {
    fail(ErrorKind::DimensionMismatch, "feature '" + id + "' has dimension " + std::to_string(vector.dim()) +
                                           ", expected " + std::to_string(dim_));
  }
  if (features_.contains(id)) fail(ErrorKind::DuplicateId, "feature id '" + id + "' appears twice");
  features_.emplace(std::move(id), std::move(vector));
}

const FeatureVector* FeatureSet::find(const std::string& id) const {
  auto it = features_.find(id);
  return it == features_.end() ? nullptr : &it->second;
}

const FeatureVector& FeatureSet::at(const std::string& id) const {
  if (const auto* f = find(id)) return *f;
  fail(ErrorKind::UnknownModelId, "no feature for id '" + id + "'");
}

FeatureVector compute_d2(const PointCloud& cloud, std::size_t bins, std::size_t pairs, std::uint64_t seed) {
  if (cloud.size() < 2) fail(ErrorKind::TooFewPoints, "D2 needs at least 2 points, cloud '" + cloud.id() + "' has 1");
  if (bins < 2) fail(ErrorKind::InvalidArgument, "D2 needs at least 2 bins");
  if (pairs < 1) fail(ErrorKind::InvalidArgument, "D2 needs at least 1 pair");

  constexpr double kMaxDistance = 2.0;
  std::vector<double> histogram(bins, 0.0);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> first(0, cloud.size() - 1);
  std::uniform_int_distribution<std::size_t> second(0, cloud.size() - 2);
  for (std::size_t k = 0; k < pairs; ++k) {
    const std::size_t i = first(rng);
    std::size_t j = second(rng);
    if (j >= i) ++j;
    const double d = distance(cloud[i], cloud[j]);
    const auto bin = static_cast<std::size_t>(d / kMaxDistance * static_cast<double>(bins));
    histogram[std::min(bin, bins - 1)] += 1.0;
  }
  const double inv = 1.0 / static_cast<double>(pairs);
  for (double& h : histogram) h *= inv;
  return FeatureVector(std::move(histogram));
}

FeatureSet read_features(std::istream& in, std::optional<std::size_t> expected_dim, std::string source_tag,
                         std::string_view source) {
  FeatureSet set(std::move(source_tag));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string id;
    if (!(fields >> id) || id.front() == '#') continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);

    std::vector<double> values;
    std::string token;
    while (fields >> token) {
      double v = 0.0;
      const char* begin = token.data() + (token.front() == '+' ? 1 : 0);
      auto [ptr, ec] = std::from_chars(begin, token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        fail(ErrorKind::ParseError, where + ": invalid number '" + token + "'");
      }
      values.push_back(v);
    }
    if (values.empty()) fail(ErrorKind::ParseError, where + ": record '" + id + "' has no values");
    if (expected_dim && values.size() != *expected_dim) {
      fail(ErrorKind::DimensionMismatch, where + ": record '" + id + "' has dimension " +
                                             std::to_string(values.size()) + ", expected " +
                                             std::to_string(*expected_dim));
    }
    try {
      set.insert(id, FeatureVector(std::move(values)));
    } catch (const Error& e) {
      fail(e.kind(), where + ": " + e.detail());
    }
  }
  return set;
}

FeatureSet load_features(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  return read_features(in, expected_dim, "external:" + path.stem().string(), path.string());
}

void write_features(std::ostream& out, const FeatureSet& features) {
  for (const auto& [id, vector] : features.features()) {
    out << id;
    for (double v : vector.values()) out << ' ' << format_double(v);
    out << '\n';
  }
}

void save_features(const std::filesystem::path& path, const FeatureSet& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  write_features(out, features);
}

}  // namespace shape_rerank
