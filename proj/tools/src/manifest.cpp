#include "shape_rerank_cli/manifest.hpp"

#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "shape_rerank/errors.hpp"

namespace shape_rerank::cli {
namespace {

using nlohmann::json;

std::string required_string(const json& object, const char* key, const std::string& where) {
  auto it = object.find(key);
  if (it == object.end() || !it->is_string() || it->get<std::string>().empty()) {
    fail(ErrorKind::ParseError, where + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::string relative_to(const std::filesystem::path& path, const std::filesystem::path& base) {
  return path.lexically_relative(base).generic_string();
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open manifest '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::ParseError, path.string() + ": manifest must be a JSON object");

  Manifest m;
  m.directory = path.parent_path();
  const std::string src = path.string();

  const auto db = doc.find("database");
  if (db == doc.end() || !db->is_array()) fail(ErrorKind::ParseError, src + ": missing 'database' array");
  std::map<std::string, std::string> model_category;
  for (std::size_t i = 0; i < db->size(); ++i) {
    const auto& e = (*db)[i];
    const std::string where = src + ": database[" + std::to_string(i) + "]";
    if (!e.is_object()) fail(ErrorKind::ParseError, where + " is not an object");
    ModelEntry entry{required_string(e, "id", where), m.directory / required_string(e, "cloud", where),
                     required_string(e, "category", where)};
    if (!model_category.emplace(entry.id, entry.category).second) {
      fail(ErrorKind::DuplicateId, where + ": model id '" + entry.id + "' appears twice");
    }
    m.database.push_back(std::move(entry));
  }

  if (auto qs = doc.find("queries"); qs != doc.end()) {
    if (!qs->is_array()) fail(ErrorKind::ParseError, src + ": 'queries' must be an array");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < qs->size(); ++i) {
      const auto& e = (*qs)[i];
      const std::string where = src + ": queries[" + std::to_string(i) + "]";
      if (!e.is_object()) fail(ErrorKind::ParseError, where + " is not an object");
      QueryEntry entry{required_string(e, "id", where), m.directory / required_string(e, "cloud", where),
                       required_string(e, "ground_truth", where), ""};
      if (!seen.insert(entry.id).second) fail(ErrorKind::DuplicateId, where + ": query id '" + entry.id + "' appears twice");
      auto gt = model_category.find(entry.ground_truth);
      if (gt == model_category.end()) {
        fail(ErrorKind::UnknownModelId, where + ": ground truth '" + entry.ground_truth + "' is not a database id");
      }
      entry.category = e.contains("category") ? required_string(e, "category", where) : gt->second;
      m.queries.push_back(std::move(entry));
    }
  }

  if (auto fs = doc.find("features"); fs != doc.end()) {
    if (!fs->is_object()) fail(ErrorKind::ParseError, src + ": 'features' must be an object");
    if (fs->contains("database")) m.features.database = m.directory / required_string(*fs, "database", src + ": features");
    if (fs->contains("queries")) m.features.queries = m.directory / required_string(*fs, "queries", src + ": features");
    if (fs->contains("name")) m.features.name = required_string(*fs, "name", src + ": features");
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  json doc;
  doc["database"] = json::array();
  for (const auto& e : manifest.database) {
    doc["database"].push_back({{"id", e.id}, {"cloud", relative_to(e.cloud, manifest.directory)}, {"category", e.category}});
  }
  doc["queries"] = json::array();
  for (const auto& q : manifest.queries) {
    doc["queries"].push_back({{"id", q.id},
                              {"cloud", relative_to(q.cloud, manifest.directory)},
                              {"ground_truth", q.ground_truth},
                              {"category", q.category}});
  }
  if (manifest.features.database || manifest.features.queries) {
    json f{{"name", manifest.features.name}};
    if (manifest.features.database) f["database"] = relative_to(*manifest.features.database, manifest.directory);
    if (manifest.features.queries) f["queries"] = relative_to(*manifest.features.queries, manifest.directory);
    doc["features"] = f;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write manifest '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace shape_rerank::cli
