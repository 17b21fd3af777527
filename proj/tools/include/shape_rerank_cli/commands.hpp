#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shape_rerank/eval.hpp"
#include "shape_rerank/metrics.hpp"
#include "shape_rerank/pipeline.hpp"
#include "shape_rerank/synthetic.hpp"
#include "shape_rerank_cli/manifest.hpp"
#include "shape_rerank_cli/store.hpp"

namespace shape_rerank::cli {

struct BuildDbOptions {
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  StoreSettings settings;
  unsigned threads = 0;
};

struct QueryOptions {
  std::filesystem::path db_dir;
  std::filesystem::path cloud;
  std::optional<std::string> cloud_format;  // xyz | ply; default from extension
  std::size_t k = 90;
  Metric metric = Metric::Mscd;
  bool rerank = true;
  bool json = false;
  bool normalize_query = false;
  std::optional<std::filesystem::path> query_features;
  std::optional<std::string> query_id;
  unsigned threads = 0;
};

struct EvaluateOptions {
  std::filesystem::path db_dir;
  std::filesystem::path manifest;
  std::size_t k = 90;
  std::vector<std::size_t> k_list{1, 5};
  Metric metric = Metric::Mscd;
  bool rerank = true;
  bool compare_metrics = false;
  bool normalize_query = false;
  std::size_t category_k = 5;
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> table;
  unsigned threads = 0;
};

struct GenSyntheticOptions {
  std::filesystem::path out_dir;
  SyntheticSpec spec;
  std::uint64_t seed = 0;
};

struct BenchOptions {
  std::filesystem::path db_dir;
  std::filesystem::path manifest;
  std::vector<std::size_t> k_list{10, 30, 90};
  Metric metric = Metric::Mscd;
  bool normalize_query = false;
  std::size_t max_queries = 0;  // 0 = all
  unsigned threads = 0;
};

/// A manifest query after preprocessing, ready for retrieval.
struct PreparedQuery {
  PointCloud cloud;
  FeatureVector feature;
};

struct PreparedQueries {
  std::vector<PreparedQuery> queries;
  GroundTruth ground_truth;
  std::size_t dropped_small = 0;       // fewer than min_points points
  std::size_t dropped_unindexed = 0;   // ground truth skipped at build time
};

PreparedQueries prepare_queries(const Manifest& manifest, const Store& store, bool normalize_query,
                                unsigned threads = 0);

/// Retrieves every query; parallel across queries, results in query order.
std::vector<RetrievalResult> retrieve_all(const std::vector<PreparedQuery>& queries, const Store& store,
                                          const RetrievalConfig& config);

/// Stable digest of result ids and score bits.
std::uint64_t results_digest(const std::vector<RetrievalResult>& results);

/// Writes a synthetic dataset as manifest.json plus models/ and queries/.
void write_synthetic(const SyntheticDataset& dataset, const std::filesystem::path& out_dir);

// Each command prints to `out` and throws shape_rerank::Error on failure.
int run_build_db(const BuildDbOptions& options, std::ostream& out);
int run_query(const QueryOptions& options, std::ostream& out);
int run_evaluate(const EvaluateOptions& options, std::ostream& out);
int run_gen_synthetic(const GenSyntheticOptions& options, std::ostream& out);
int run_bench(const BenchOptions& options, std::ostream& out);

/// Parses argv, dispatches, and turns failures into a one-line diagnostic
/// on `err` plus a nonzero return.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shape_rerank::cli
