#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shape_rerank/database.hpp"
#include "shape_rerank/pipeline.hpp"

namespace shape_rerank {

/// Ground-truth model and category for each query id.
struct GroundTruth {
  std::map<std::string, std::string> model_of;
  std::map<std::string, std::string> category_of;

  void add(const std::string& query_id, std::string model_id, std::string category);
  /// Both throw MissingGroundTruth.
  const std::string& model(const std::string& query_id) const;
  const std::string& category(const std::string& query_id) const;
  /// Throws UnknownModelId if a referenced model is not in the database.
  void validate_against(const Database& database) const;
};

/// Fraction of queries whose ground truth is among the first k entries of
/// the final (or initial) candidate set.
double topk_accuracy(std::span<const RetrievalResult> results, const GroundTruth& gt, std::size_t k,
                     bool use_final = true);

/// Mean mscd(retrieved top-1 model, ground-truth model) over queries.
double top1_chamfer(std::span<const RetrievalResult> results, const GroundTruth& gt, const Database& database,
                    bool use_final = true);

struct RankingSummary {
  std::optional<double> mean;  // empty when every query was excluded
  std::size_t counted = 0;
  std::size_t excluded = 0;    // ground truth absent from the candidate set
};

/// Mean 1-based rank of the ground truth. Queries whose ground truth is not
/// among the candidates are excluded from the mean and counted separately.
RankingSummary gt_ranking(std::span<const RetrievalResult> results, const GroundTruth& gt, bool use_final = true);

/// Fraction of (query, top-k candidate) pairs whose candidate category
/// equals the query's ground-truth category. Defaults to the initial set,
/// where the ratio characterizes the descriptor.
double category_ratio(std::span<const RetrievalResult> results, const Database& database, const GroundTruth& gt,
                      std::size_t k = 5, bool use_final = false);

struct Averages {
  double instance = 0.0;                 // mean over queries
  double class_average = 0.0;            // unweighted mean of per-class means
  std::map<std::string, double> per_class;
};

/// Throws InvalidArgument on empty input, MissingCategory for unlabeled queries.
Averages class_and_instance_averages(const std::map<std::string, double>& per_query,
                                     const std::map<std::string, std::string>& categories);

struct EvalOptions {
  std::vector<std::size_t> ks{1, 5};
  std::size_t category_k = 5;
};

struct EvalReport {
  std::string label;  // metric name, or "feature" when re-ranking is off
  std::size_t query_count = 0;
  std::size_t search_range = 0;  // largest candidate-set size observed
  std::map<std::size_t, Averages> ra_initial;
  std::map<std::size_t, Averages> ra_final;
  Averages top1_chamfer_initial;
  Averages top1_chamfer_final;
  RankingSummary ranking_initial;
  RankingSummary ranking_final;
  double category_ratio_initial = 0.0;
  double category_ratio_final = 0.0;
};

EvalReport evaluate(std::span<const RetrievalResult> results, const GroundTruth& gt, const Database& database,
                    const EvalOptions& options, std::string label);

/// Key-sorted "key value" lines with 4-decimal values; several reports
/// combine into one listing, keys prefixed by report label.
std::string format_report(std::span<const EvalReport> reports);

/// Per-query CSV table: query, category, gt, rank and top-1 before and after re-ranking.
std::string format_per_query_table(std::span<const RetrievalResult> results, const GroundTruth& gt);

}  // namespace shape_rerank
