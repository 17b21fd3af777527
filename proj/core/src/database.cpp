#include "shape_rerank/database.hpp"

#include <mutex>
#include <unordered_map>

#include "shape_rerank/errors.hpp"
#include "shape_rerank/parallel.hpp"

namespace shape_rerank {

struct Database::IndexCache {
  std::mutex mutex;
  std::unordered_map<std::string, std::shared_ptr<const SpatialIndex>> indices;
};

Database::Database() : cache_(std::make_unique<IndexCache>()) {}
Database::~Database() = default;
Database::Database(Database&&) noexcept = default;
Database& Database::operator=(Database&&) noexcept = default;

void Database::add(PointCloud cloud, std::string category) {
  std::string id = cloud.id();
  if (models_.contains(id)) fail(ErrorKind::DuplicateId, "model id '" + id + "' appears twice");
  if (category.empty()) fail(ErrorKind::MissingCategory, "model '" + id + "' has no category");
  models_.emplace(std::move(id), Entry{std::move(cloud), std::move(category)});
}

std::vector<std::string> Database::ids() const {
  std::vector<std::string> out;
  out.reserve(models_.size());
  for (const auto& [id, _] : models_) out.push_back(id);
  return out;
}

const Database::Entry& Database::entry(const std::string& id) const {
  auto it = models_.find(id);
  if (it == models_.end()) fail(ErrorKind::UnknownModelId, "unknown model id '" + id + "'");
  return it->second;
}

const PointCloud& Database::cloud(const std::string& id) const { return entry(id).cloud; }
const std::string& Database::category(const std::string& id) const { return entry(id).category; }

std::shared_ptr<const SpatialIndex> Database::spatial_index(const std::string& id) const {
  const Entry& e = entry(id);
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->indices.find(id); it != cache_->indices.end()) return it->second;
  }
  // Built outside the lock; a concurrent builder of the same id produces an
  // identical tree and whichever insert lands first wins.
  auto built = std::make_shared<const SpatialIndex>(e.cloud);
  std::lock_guard lock(cache_->mutex);
  return cache_->indices.try_emplace(id, std::move(built)).first->second;
}

void Database::warm_spatial_indices(unsigned threads) const {
  const auto all = ids();
  parallel_for(all.size(), threads, [&](std::size_t i) { spatial_index(all[i]); });
}

std::size_t Database::cached_index_count() const {
  std::lock_guard lock(cache_->mutex);
  return cache_->indices.size();
}

void Database::clear_spatial_index_cache() const {
  std::lock_guard lock(cache_->mutex);
  cache_->indices.clear();
}

}  // namespace shape_rerank
