#pragma once

#include <cstddef>
#include <string>

#include "shape_rerank/candidate_set.hpp"
#include "shape_rerank/database.hpp"
#include "shape_rerank/descriptor.hpp"
#include "shape_rerank/feature_index.hpp"
#include "shape_rerank/metrics.hpp"

namespace shape_rerank {

struct RetrievalConfig {
  std::size_t k = 90;
  Metric metric = Metric::Mscd;
  bool rerank = true;
  /// 0 selects default_thread_count().
  unsigned threads = 0;

  void validate() const;
};

struct RetrievalResult {
  std::string query_id;
  CandidateSet initial;  // feature-ranked
  CandidateSet final;    // geometry re-ranked; equals `initial` when re-ranking is off
};

/// Feature-based ranking: the k nearest database features.
CandidateSet rank(const FeatureVector& query_feature, const FeatureIndex& index, std::size_t k);

/// Re-orders candidates by metric(query, model), scan as source and CAD model
/// as target. Scores become geometric distances; ties fall back to id order.
/// Model spatial indices come from the database cache.
CandidateSet rerank(const PointCloud& query_cloud, const CandidateSet& candidates, const Database& database,
                    Metric metric, unsigned threads = 0);

RetrievalResult retrieve(const PointCloud& query, const FeatureVector& query_feature, const FeatureIndex& index,
                         const Database& database, const RetrievalConfig& config);

}  // namespace shape_rerank
