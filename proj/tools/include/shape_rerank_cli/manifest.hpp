#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace shape_rerank::cli {

struct ModelEntry {
  std::string id;
  std::filesystem::path cloud;  // resolved against the manifest directory
  std::string category;
};

struct QueryEntry {
  std::string id;
  std::filesystem::path cloud;
  std::string ground_truth;
  std::string category;  // defaults to the ground-truth model's category
};

struct FeatureFiles {
  std::optional<std::filesystem::path> database;
  std::optional<std::filesystem::path> queries;
  std::string name = "external";
};

/// JSON manifest:
///   {
///     "database": [{"id": "...", "cloud": "rel/path.xyz", "category": "..."}],
///     "queries":  [{"id": "...", "cloud": "...", "ground_truth": "...", "category": "..."}],
///     "features": {"name": "...", "database": "db.txt", "queries": "q.txt"}
///   }
/// "queries", "features" and query "category" are optional.
struct Manifest {
  std::filesystem::path directory;
  std::vector<ModelEntry> database;
  std::vector<QueryEntry> queries;
  FeatureFiles features;
};

/// Throws ParseError for malformed JSON or missing fields, DuplicateId for
/// repeated ids, UnknownModelId for ground truth not among database ids.
Manifest load_manifest(const std::filesystem::path& path);

/// Writes paths relative to `manifest.directory`.
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace shape_rerank::cli
