#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "shape_rerank/candidate_set.hpp"
#include "shape_rerank/descriptor.hpp"

namespace shape_rerank {

/// Exact k-nearest-neighbor search over database features.
///
/// Entries are stored in ascending id order, so comparing (distance, entry
/// index) is the same as comparing (distance, id). Up to
/// kMaxKdTreeDimension dimensions a kd-tree is used; above that a dense
/// linear scan, since plane pruning stops paying off in high dimension.
class FeatureIndex {
 public:
  enum class Strategy { Auto, KdTree, LinearScan };

  static constexpr std::size_t kMaxKdTreeDimension = 32;
  static constexpr std::size_t kLeafSize = 16;
  static constexpr std::uint16_t kFormatVersion = 1;

  explicit FeatureIndex(const FeatureSet& features, Strategy strategy = Strategy::Auto);

  /// min(k, size()) nearest entries ordered by (distance, id).
  CandidateSet knn(const FeatureVector& query, std::size_t k) const;

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  bool uses_kd_tree() const noexcept { return !nodes_.empty(); }

  // Binary layout, little-endian:
  //   "SRNK" | u16 version | u32 dim | u64 count
  //   | count x (u32 length, id bytes) | count*dim f64 | u32 CRC32 of all prior bytes
  void write(std::ostream& out) const;
  static FeatureIndex read(std::istream& in, Strategy strategy = Strategy::Auto);
  void save(const std::filesystem::path& path) const;
  static FeatureIndex load(const std::filesystem::path& path, Strategy strategy = Strategy::Auto);

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t axis = -1;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double split = 0.0;
  };
  struct Hit {
    double score;
    std::uint32_t entry;
  };

  FeatureIndex(std::vector<std::string> ids, std::vector<double> data, std::size_t dim, Strategy strategy);
  void build_tree(Strategy strategy);
  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const double* query, std::size_t k, std::vector<Hit>& heap) const;
  double entry_distance(std::uint32_t entry, const double* query) const;
  CandidateSet to_candidates(std::vector<Hit> hits) const;

  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> data_;          // row-major, one row per entry
  std::vector<std::uint32_t> order_;  // tree leaves reference entries through this
  std::vector<Node> nodes_;
};

}  // namespace shape_rerank
