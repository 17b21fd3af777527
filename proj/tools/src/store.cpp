#include "shape_rerank_cli/store.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "shape_rerank/errors.hpp"
#include "shape_rerank/parallel.hpp"
#include "shape_rerank/point_cloud_io.hpp"

namespace shape_rerank::cli {
namespace {

using nlohmann::json;

constexpr int kStoreVersion = 1;

std::uint64_t cloud_seed(std::uint64_t seed, const std::string& id) {
  return mix_seed(seed, stable_hash(id.data(), id.size()));
}

std::string cloud_file(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "clouds/%06zu.xyz", i);
  return buf;
}

// Runs task(i) in parallel and rethrows the failure with the lowest index,
// so the reported error does not depend on scheduling.
template <class Task>
void for_each_entry(std::size_t count, unsigned threads, Task task) {
  std::vector<std::exception_ptr> errors(count);
  parallel_for(count, threads, [&](std::size_t i) {
    try {
      task(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

PointCloud prepare_model(const PointCloud& raw, const StoreSettings& settings) {
  return downsample(normalize(raw), settings.working_resolution, cloud_seed(settings.seed, raw.id()));
}

PointCloud prepare_query(const PointCloud& raw, const StoreSettings& settings, bool normalize_query) {
  const PointCloud framed = normalize_query ? normalize(raw) : raw;
  return downsample(framed, settings.working_resolution, cloud_seed(settings.seed, raw.id()));
}

BuildSummary build_store(const Manifest& manifest, const std::filesystem::path& out_dir,
                         const StoreSettings& requested, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  if (manifest.database.empty()) fail(ErrorKind::InvalidArgument, "manifest has no database entries");
  StoreSettings settings = requested;
  if (manifest.features.database) settings.descriptor = "external:" + manifest.features.name;

  std::vector<std::optional<PointCloud>> prepared(manifest.database.size());
  for_each_entry(manifest.database.size(), threads, [&](std::size_t i) {
    const auto& entry = manifest.database[i];
    const PointCloud raw = load_point_cloud(entry.cloud).with_id(entry.id);
    if (raw.size() < settings.min_points) return;
    prepared[i] = prepare_model(raw, settings);
  });

  Database database;
  std::vector<std::string> skipped;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    if (prepared[i]) {
      database.add(std::move(*prepared[i]), manifest.database[i].category);
    } else {
      skipped.push_back(manifest.database[i].id);
    }
  }
  if (database.empty()) fail(ErrorKind::InvalidArgument, "every database model has fewer than min_points points");
  const auto ids = database.ids();

  FeatureSet features(settings.descriptor);
  if (settings.builtin_descriptor()) {
    std::vector<std::optional<FeatureVector>> computed(ids.size());
    for_each_entry(ids.size(), threads, [&](std::size_t i) { computed[i] = compute_d2(database.cloud(ids[i]), settings.d2); });
    for (std::size_t i = 0; i < ids.size(); ++i) features.insert(ids[i], std::move(*computed[i]));
  } else {
    const FeatureSet external = load_features(*manifest.features.database);
    for (const auto& id : ids) {
      const auto* f = external.find(id);
      if (!f) fail(ErrorKind::UnknownModelId, manifest.features.database->string() + ": no feature for model '" + id + "'");
      features.insert(id, *f);
    }
  }
  const FeatureIndex index(features);

  std::filesystem::create_directories(out_dir / "clouds");
  json models = json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::string file = cloud_file(i);
    save_xyz(out_dir / file, database.cloud(ids[i]));
    models.push_back({{"id", ids[i]}, {"category", database.category(ids[i])}, {"cloud", file}});
  }
  save_features(out_dir / "features.txt", features);
  index.save(out_dir / "features.srnk");

  json doc{{"format", "shape_rerank-db"},
           {"version", kStoreVersion},
           {"working_resolution", settings.working_resolution},
           {"min_points", settings.min_points},
           {"seed", settings.seed},
           {"descriptor",
            {{"kind", settings.descriptor},
             {"d2_bins", settings.d2.bins},
             {"d2_pairs", settings.d2.pairs},
             {"d2_seed", settings.d2.seed}}},
           {"models", models},
           {"skipped", skipped}};
  std::ofstream out(out_dir / "database.json", std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + (out_dir / "database.json").string() + "'");
  out << doc.dump(2) << '\n';

  BuildSummary summary;
  summary.models = ids.size();
  summary.skipped = skipped.size();
  summary.dim = features.dim();
  summary.kd_tree = index.uses_kd_tree();
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

Store load_store(const std::filesystem::path& db_dir) {
  const auto meta_path = db_dir / "database.json";
  std::ifstream in(meta_path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + meta_path.string() + "' (is this a built database?)");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::ParseError, meta_path.string() + ": " + e.what());
  }

  Store store;
  try {
    if (doc.at("format").get<std::string>() != "shape_rerank-db") fail(ErrorKind::ParseError, "not a database file");
    if (doc.at("version").get<int>() != kStoreVersion) {
      fail(ErrorKind::VersionMismatch, meta_path.string() + ": unsupported database version");
    }
    auto& s = store.settings;
    s.working_resolution = doc.at("working_resolution").get<std::size_t>();
    s.min_points = doc.at("min_points").get<std::size_t>();
    s.seed = doc.at("seed").get<std::uint64_t>();
    const auto& d = doc.at("descriptor");
    s.descriptor = d.at("kind").get<std::string>();
    s.d2.bins = d.at("d2_bins").get<std::size_t>();
    s.d2.pairs = d.at("d2_pairs").get<std::size_t>();
    s.d2.seed = d.at("d2_seed").get<std::uint64_t>();
    store.skipped = doc.at("skipped").get<std::vector<std::string>>();

    const auto& models = doc.at("models");
    std::vector<std::optional<PointCloud>> clouds(models.size());
    for_each_entry(models.size(), 0, [&](std::size_t i) {
      clouds[i] = load_point_cloud(db_dir / models[i].at("cloud").get<std::string>())
                      .with_id(models[i].at("id").get<std::string>());
    });
    for (std::size_t i = 0; i < models.size(); ++i) {
      store.database.add(std::move(*clouds[i]), models[i].at("category").get<std::string>());
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, meta_path.string() + ": " + e.what());
  }

  std::ifstream feature_file(db_dir / "features.txt");
  if (!feature_file) fail(ErrorKind::IoError, "cannot open '" + (db_dir / "features.txt").string() + "'");
  store.features = read_features(feature_file, std::nullopt, store.settings.descriptor,
                                 (db_dir / "features.txt").string());
  store.index = std::make_unique<FeatureIndex>(FeatureIndex::load(db_dir / "features.srnk"));
  if (store.index->ids() != store.database.ids()) {
    fail(ErrorKind::CorruptFile, "feature index does not match the database model list");
  }
  return store;
}

}  // namespace shape_rerank::cli
