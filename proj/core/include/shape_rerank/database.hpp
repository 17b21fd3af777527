#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "shape_rerank/kd_tree3.hpp"
#include "shape_rerank/point_cloud.hpp"

namespace shape_rerank {

/// CAD models keyed by id, each with a category label.
///
/// Clouds are immutable once added. Spatial indices over model clouds are
/// built on first use and cached; the cache is internally synchronized, so a
/// const Database can be shared by concurrent re-ranking threads.
class Database {
 public:
  Database();
  ~Database();
  Database(Database&&) noexcept;
  Database& operator=(Database&&) noexcept;

  /// Throws DuplicateId.
  void add(PointCloud cloud, std::string category);

  std::size_t size() const noexcept { return models_.size(); }
  bool empty() const noexcept { return models_.empty(); }
  bool contains(const std::string& id) const { return models_.contains(id); }
  std::vector<std::string> ids() const;

  /// Both throw UnknownModelId.
  const PointCloud& cloud(const std::string& id) const;
  const std::string& category(const std::string& id) const;

  std::shared_ptr<const SpatialIndex> spatial_index(const std::string& id) const;
  /// Builds every missing index up front.
  void warm_spatial_indices(unsigned threads = 0) const;
  std::size_t cached_index_count() const;
  void clear_spatial_index_cache() const;

 private:
  struct Entry {
    PointCloud cloud;
    std::string category;
  };
  struct IndexCache;

  const Entry& entry(const std::string& id) const;

  std::map<std::string, Entry> models_;
  std::unique_ptr<IndexCache> cache_;
};

}  // namespace shape_rerank
