#include "shape_rerank/pipeline.hpp"

#include <optional>

#include "shape_rerank/errors.hpp"
#include "shape_rerank/parallel.hpp"

namespace shape_rerank {

void RetrievalConfig::validate() const {
  if (k < 1) fail(ErrorKind::InvalidArgument, "k must be >= 1");
  if (metric != Metric::Cd && metric != Metric::Scd && metric != Metric::Mscd) {
    fail(ErrorKind::InvalidArgument, "unknown metric");
  }
}

CandidateSet rank(const FeatureVector& query_feature, const FeatureIndex& index, std::size_t k) {
  return index.knn(query_feature, k);
}

CandidateSet rerank(const PointCloud& query_cloud, const CandidateSet& candidates, const Database& database,
                    Metric metric, unsigned threads) {
  for (const auto& c : candidates.entries) {
    if (!database.contains(c.id)) fail(ErrorKind::UnknownModelId, "candidate '" + c.id + "' is not in the database");
  }

  std::optional<SpatialIndex> query_index;
  if (metric == Metric::Cd) query_index.emplace(query_cloud);

  std::vector<Candidate> scored(candidates.entries);
  parallel_for(scored.size(), threads, [&](std::size_t i) {
    const auto model_index = database.spatial_index(scored[i].id);
    switch (metric) {
      case Metric::Mscd: scored[i].score = mscd(query_cloud, *model_index); break;
      case Metric::Scd: scored[i].score = scd(query_cloud, *model_index); break;
      case Metric::Cd:
        scored[i].score = chamfer(query_cloud, *query_index, database.cloud(scored[i].id), *model_index);
        break;
    }
  });
  return make_candidate_set(std::move(scored), ScoreKind::GeometricDistance);
}

RetrievalResult retrieve(const PointCloud& query, const FeatureVector& query_feature, const FeatureIndex& index,
                         const Database& database, const RetrievalConfig& config) {
  config.validate();
  RetrievalResult result;
  result.query_id = query.id();
  result.initial = rank(query_feature, index, config.k);
  result.final = config.rerank ? rerank(query, result.initial, database, config.metric, config.threads)
                               : result.initial;
  return result;
}

}  // namespace shape_rerank
