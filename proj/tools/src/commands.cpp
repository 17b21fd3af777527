#include "shape_rerank_cli/commands.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "shape_rerank/errors.hpp"
#include "shape_rerank/parallel.hpp"
#include "shape_rerank/point_cloud_io.hpp"

namespace shape_rerank::cli {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << text;
}

FeatureVector query_feature(const PointCloud& cloud, const Store& store, const FeatureSet* external,
                            const std::string& id) {
  if (store.settings.builtin_descriptor()) return compute_d2(cloud, store.settings.d2);
  if (!external) {
    fail(ErrorKind::InvalidArgument,
         "database uses " + store.settings.descriptor + " features; query features must be supplied");
  }
  const auto* f = external->find(id);
  if (!f) fail(ErrorKind::UnknownModelId, "no query feature for '" + id + "'");
  return *f;
}

RetrievalConfig make_config(std::size_t k, Metric metric, bool rerank, unsigned threads) {
  RetrievalConfig config;
  config.k = k;
  config.metric = metric;
  config.rerank = rerank;
  config.threads = threads;
  config.validate();
  return config;
}

nlohmann::json candidates_json(const CandidateSet& set) {
  auto rows = nlohmann::json::array();
  for (const auto& c : set.entries) rows.push_back({{"id", c.id}, {"score", c.score}});
  return {{"score_kind", std::string(to_string(set.kind))}, {"entries", rows}};
}

}  // namespace

PreparedQueries prepare_queries(const Manifest& manifest, const Store& store, bool normalize_query,
                                unsigned threads) {
  std::optional<FeatureSet> external;
  if (!store.settings.builtin_descriptor()) {
    if (!manifest.features.queries) {
      fail(ErrorKind::InvalidArgument,
           "database uses " + store.settings.descriptor + " features but the manifest lists no query feature file");
    }
    external = load_features(*manifest.features.queries, store.index->dim());
  }

  PreparedQueries out;
  const auto& entries = manifest.queries;
  std::vector<std::optional<PreparedQuery>> slots(entries.size());
  std::vector<std::exception_ptr> errors(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    try {
      const auto& e = entries[i];
      if (!store.database.contains(e.ground_truth)) return;
      const PointCloud raw = load_point_cloud(e.cloud).with_id(e.id);
      if (raw.size() < store.settings.min_points) return;
      PointCloud cloud = prepare_query(raw, store.settings, normalize_query);
      FeatureVector feature = query_feature(cloud, store, external ? &*external : nullptr, e.id);
      slots[i] = PreparedQuery{std::move(cloud), std::move(feature)};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (slots[i]) {
      out.ground_truth.add(entries[i].id, entries[i].ground_truth, entries[i].category);
      out.queries.push_back(std::move(*slots[i]));
    } else if (!store.database.contains(entries[i].ground_truth)) {
      ++out.dropped_unindexed;
    } else {
      ++out.dropped_small;
    }
  }
  return out;
}

std::vector<RetrievalResult> retrieve_all(const std::vector<PreparedQuery>& queries, const Store& store,
                                          const RetrievalConfig& config) {
  std::vector<RetrievalResult> results(queries.size());
  RetrievalConfig inner = config;
  inner.threads = 1;
  parallel_for(queries.size(), config.threads, [&](std::size_t i) {
    results[i] = retrieve(queries[i].cloud, queries[i].feature, *store.index, store.database, inner);
  });
  return results;
}

std::uint64_t results_digest(const std::vector<RetrievalResult>& results) {
  std::uint64_t h = stable_hash(nullptr, 0);
  auto mix_bytes = [&h](const void* data, std::size_t size) { h = stable_hash(data, size, h); };
  for (const auto& r : results) {
    mix_bytes(r.query_id.data(), r.query_id.size());
    for (const auto* set : {&r.initial, &r.final}) {
      for (const auto& c : set->entries) {
        mix_bytes(c.id.data(), c.id.size());
        const auto bits = std::bit_cast<std::uint64_t>(c.score);
        mix_bytes(&bits, sizeof(bits));
      }
    }
  }
  return h;
}

void write_synthetic(const SyntheticDataset& dataset, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "models");
  std::filesystem::create_directories(out_dir / "queries");
  Manifest manifest;
  manifest.directory = out_dir;
  for (const auto& id : dataset.database.ids()) {
    const auto path = out_dir / "models" / (id + ".xyz");
    save_xyz(path, dataset.database.cloud(id));
    manifest.database.push_back({id, path, dataset.database.category(id)});
  }
  for (const auto& q : dataset.queries) {
    const auto path = out_dir / "queries" / (q.id() + ".xyz");
    save_xyz(path, q);
    manifest.queries.push_back(
        {q.id(), path, dataset.ground_truth.model(q.id()), dataset.ground_truth.category(q.id())});
  }
  save_manifest(out_dir / "manifest.json", manifest);
}

int run_build_db(const BuildDbOptions& options, std::ostream& out) {
  const Manifest manifest = load_manifest(options.manifest);
  const BuildSummary s = build_store(manifest, options.out_dir, options.settings, options.threads);
  out << "built database " << options.out_dir.string() << "\n"
      << "  models  " << s.models << "\n"
      << "  skipped " << s.skipped << " (fewer than " << options.settings.min_points << " points)\n"
      << "  dim     " << s.dim << "\n"
      << "  search  " << (s.kd_tree ? "kd-tree" : "linear-scan") << "\n"
      << "  seconds " << fixed(s.seconds, 3) << "\n";
  return 0;
}

int run_query(const QueryOptions& options, std::ostream& out) {
  const Store store = load_store(options.db_dir);
  CloudFormat format = format_from_path(options.cloud);
  if (options.cloud_format) {
    auto parsed = parse_cloud_format(*options.cloud_format);
    if (!parsed) fail(ErrorKind::InvalidArgument, "unknown cloud format '" + *options.cloud_format + "'");
    format = *parsed;
  }
  const std::string id = options.query_id.value_or(options.cloud.stem().string());
  const PointCloud raw = load_point_cloud(options.cloud, format).with_id(id);
  const PointCloud cloud = prepare_query(raw, store.settings, options.normalize_query);

  std::optional<FeatureSet> external;
  if (options.query_features) external = load_features(*options.query_features, store.index->dim());
  const FeatureVector feature = query_feature(cloud, store, external ? &*external : nullptr, id);

  const auto config = make_config(options.k, options.metric, options.rerank, options.threads);
  const RetrievalResult result = retrieve(cloud, feature, *store.index, store.database, config);

  if (options.json) {
    nlohmann::json doc{{"query", result.query_id},
                       {"metric", std::string(to_string(options.metric))},
                       {"k", options.k},
                       {"rerank", options.rerank},
                       {"initial", candidates_json(result.initial)},
                       {"final", candidates_json(result.final)}};
    out << doc.dump(2) << '\n';
    return 0;
  }
  out << "# query " << result.query_id << " metric " << to_string(options.metric) << " k " << options.k
      << " rerank " << (options.rerank ? "on" : "off") << "\n";
  for (std::size_t i = 0; i < result.final.size(); ++i) {
    out << (i + 1) << '\t' << result.final[i].id << '\t' << fixed(result.final[i].score, 4) << '\n';
  }
  return 0;
}

int run_evaluate(const EvaluateOptions& options, std::ostream& out) {
  const Store store = load_store(options.db_dir);
  const Manifest manifest = load_manifest(options.manifest);
  const PreparedQueries prepared = prepare_queries(manifest, store, options.normalize_query, options.threads);
  if (prepared.queries.empty()) fail(ErrorKind::InvalidArgument, "no evaluable queries in the manifest");

  std::vector<std::size_t> ks = options.k_list;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  const EvalOptions eval_options{ks, options.category_k};

  std::vector<Metric> metrics{options.metric};
  if (options.compare_metrics) metrics = {Metric::Cd, Metric::Scd, Metric::Mscd};
  if (!options.rerank) metrics = {options.metric};

  std::vector<EvalReport> reports;
  std::optional<std::vector<RetrievalResult>> primary;
  for (Metric m : metrics) {
    const auto config = make_config(options.k, m, options.rerank, options.threads);
    auto results = retrieve_all(prepared.queries, store, config);
    reports.push_back(evaluate(results, prepared.ground_truth, store.database, eval_options,
                               options.rerank ? std::string(to_string(m)) : "feature"));
    if (m == options.metric || !primary) primary = std::move(results);
  }

  const std::string report = format_report(reports);
  out << "evaluated " << prepared.queries.size() << " queries";
  if (prepared.dropped_small + prepared.dropped_unindexed > 0) {
    out << " (dropped " << prepared.dropped_small << " below min_points, " << prepared.dropped_unindexed
        << " with unindexed ground truth)";
  }
  out << "\n";
  if (options.report) {
    write_text_file(*options.report, report);
    out << "report written to " << options.report->string() << "\n";
  } else {
    out << report;
  }
  if (options.table) {
    write_text_file(*options.table, format_per_query_table(*primary, prepared.ground_truth));
    out << "table written to " << options.table->string() << "\n";
  }
  return 0;
}

int run_gen_synthetic(const GenSyntheticOptions& options, std::ostream& out) {
  const SyntheticDataset dataset = generate_synthetic(options.spec, options.seed);
  write_synthetic(dataset, options.out_dir);
  out << "wrote " << dataset.database.size() << " models and " << dataset.queries.size() << " queries to "
      << (options.out_dir / "manifest.json").string() << "\n";
  return 0;
}

int run_bench(const BenchOptions& options, std::ostream& out) {
  if (options.k_list.empty()) fail(ErrorKind::InvalidArgument, "k-list must not be empty");
  const unsigned threads = options.threads == 0 ? default_thread_count() : options.threads;

  struct Row {
    std::string stage;
    std::string k;
    double seconds;
    std::size_t items;
    std::string unit;
  };
  std::vector<Row> rows;

  auto t = Clock::now();
  const Store store = load_store(options.db_dir);
  const Manifest manifest = load_manifest(options.manifest);
  rows.push_back({"load_database", "-", seconds_since(t), store.database.size(), "models"});

  t = Clock::now();
  PreparedQueries prepared = prepare_queries(manifest, store, options.normalize_query, threads);
  if (options.max_queries > 0 && prepared.queries.size() > options.max_queries) {
    prepared.queries.erase(prepared.queries.begin() + static_cast<std::ptrdiff_t>(options.max_queries),
                           prepared.queries.end());
  }
  if (prepared.queries.empty()) fail(ErrorKind::InvalidArgument, "no benchmarkable queries in the manifest");
  rows.push_back({"prepare_queries", "-", seconds_since(t), prepared.queries.size(), "queries"});

  std::vector<std::size_t> ks = options.k_list;
  std::sort(ks.begin(), ks.end());
  const std::size_t k_max = ks.back();

  t = Clock::now();
  std::vector<CandidateSet> initial;
  initial.reserve(prepared.queries.size());
  for (const auto& q : prepared.queries) initial.push_back(rank(q.feature, *store.index, k_max));
  rows.push_back({"feature_search", std::to_string(k_max), seconds_since(t), prepared.queries.size(), "queries"});

  store.database.clear_spatial_index_cache();
  t = Clock::now();
  store.database.warm_spatial_indices(threads);
  rows.push_back({"spatial_index_build", "-", seconds_since(t), store.database.size(), "models"});

  std::vector<RetrievalResult> final_results;
  for (std::size_t k : ks) {
    std::size_t point_queries = 0;
    std::vector<RetrievalResult> results(prepared.queries.size());
    t = Clock::now();
    for (std::size_t i = 0; i < prepared.queries.size(); ++i) {
      CandidateSet head = initial[i];
      if (head.entries.size() > k) head.entries.resize(k);
      results[i].query_id = prepared.queries[i].cloud.id();
      results[i].final = rerank(prepared.queries[i].cloud, head, store.database, options.metric, threads);
      results[i].initial = std::move(head);
      point_queries += prepared.queries[i].cloud.size() * results[i].final.size();
    }
    rows.push_back({"rerank_" + std::string(to_string(options.metric)), std::to_string(k), seconds_since(t),
                    point_queries, "nn-queries"});
    if (k == k_max) final_results = std::move(results);
  }

  out << "threads " << threads << "\n";
  out << std::left << std::setw(22) << "stage" << std::setw(6) << "k" << std::right << std::setw(12) << "seconds"
      << std::setw(12) << "items" << std::setw(16) << "items/sec" << "  unit\n";
  for (const auto& r : rows) {
    const double rate = r.seconds > 0.0 ? static_cast<double>(r.items) / r.seconds : 0.0;
    out << std::left << std::setw(22) << r.stage << std::setw(6) << r.k << std::right << std::setw(12)
        << fixed(r.seconds, 4) << std::setw(12) << r.items << std::setw(16) << fixed(rate, 1) << "  " << r.unit
        << "\n";
  }
  char digest[32];
  std::snprintf(digest, sizeof(digest), "%016llx", static_cast<unsigned long long>(results_digest(final_results)));
  out << "digest " << digest << "\n";
  return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fine-grained 3D shape retrieval with geometric re-ranking", "shape_rerank"};
  app.require_subcommand(1);

  // Metric names are parsed after CLI11 is done; it only checks membership.
  std::map<CLI::App*, std::string> metric_names;
  auto metric_option = [&](CLI::App* sub) {
    metric_names[sub] = "mscd";
    sub->add_option("--metric", metric_names[sub], "Re-ranking metric: cd, scd or mscd")
        ->check(CLI::IsMember({"cd", "scd", "mscd"}));
  };
  auto metric_of = [&](CLI::App* sub) { return *parse_metric(metric_names[sub]); };

  BuildDbOptions build;
  auto* build_cmd = app.add_subcommand("build-db", "Preprocess models, compute features and write a database");
  build_cmd->add_option("manifest", build.manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("out_dir", build.out_dir, "Output database directory")->required();
  build_cmd->add_option("--resolution", build.settings.working_resolution, "Working points per cloud")
      ->check(CLI::PositiveNumber);
  build_cmd->add_option("--min-points", build.settings.min_points, "Skip clouds with fewer points");
  build_cmd->add_option("--seed", build.settings.seed, "Downsampling seed");
  build_cmd->add_option("--d2-bins", build.settings.d2.bins, "D2 histogram bins")->check(CLI::Range(2, 1 << 20));
  build_cmd->add_option("--d2-pairs", build.settings.d2.pairs, "D2 sampled point pairs")->check(CLI::PositiveNumber);
  build_cmd->add_option("--d2-seed", build.settings.d2.seed, "D2 pair-sampling seed");
  build_cmd->add_option("--threads", build.threads, "Worker threads (0 = default)");

  QueryOptions query;
  std::string query_format = "text";
  auto* query_cmd = app.add_subcommand("query", "Retrieve the closest database models for one cloud");
  query_cmd->add_option("db_dir", query.db_dir, "Database directory")->required()->check(CLI::ExistingDirectory);
  query_cmd->add_option("cloud", query.cloud, "Query cloud (.xyz or .ply)")->required()->check(CLI::ExistingFile);
  query_cmd->add_option("--cloud-format", query.cloud_format, "xyz or ply (default: from extension)");
  query_cmd->add_option("--k", query.k, "Candidate count")->check(CLI::PositiveNumber);
  metric_option(query_cmd);
  query_cmd->add_flag("--no-rerank", [&query](std::int64_t) { query.rerank = false; }, "Skip geometric re-ranking");
  query_cmd->add_option("--format", query_format, "Output format")->check(CLI::IsMember({"text", "json"}));
  query_cmd->add_flag("--normalize-query", query.normalize_query, "Normalize the query instead of assuming alignment");
  query_cmd->add_option("--query-features", query.query_features, "Feature file holding the query's feature");
  query_cmd->add_option("--query-id", query.query_id, "Query id (default: file stem)");
  query_cmd->add_option("--threads", query.threads, "Worker threads (0 = default)");

  EvaluateOptions evaluate_opts;
  auto* eval_cmd = app.add_subcommand("evaluate", "Run all manifest queries and report retrieval metrics");
  eval_cmd->add_option("db_dir", evaluate_opts.db_dir, "Database directory")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("manifest", evaluate_opts.manifest, "Manifest with queries")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--k", evaluate_opts.k, "Candidate count (search range)")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--k-list", evaluate_opts.k_list, "Top-k cutoffs, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  metric_option(eval_cmd);
  eval_cmd->add_flag("--no-rerank", [&evaluate_opts](std::int64_t) { evaluate_opts.rerank = false; },
                     "Evaluate feature ranking only");
  eval_cmd->add_flag("--compare-metrics", evaluate_opts.compare_metrics, "Report cd, scd and mscd side by side");
  eval_cmd->add_flag("--normalize-query", evaluate_opts.normalize_query, "Normalize queries");
  eval_cmd->add_option("--category-k", evaluate_opts.category_k, "Cutoff for the category ratio")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--report", evaluate_opts.report, "Write the report here instead of stdout");
  eval_cmd->add_option("--table", evaluate_opts.table, "Write a per-query CSV table");
  eval_cmd->add_option("--threads", evaluate_opts.threads, "Worker threads (0 = default)");

  GenSyntheticOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Generate a procedural benchmark dataset");
  gen_cmd->add_option("out_dir", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--models", gen.spec.models, "Database model count");
  gen_cmd->add_option("--classes", gen.spec.classes, "Class count");
  gen_cmd->add_option("--queries", gen.spec.queries, "Query count");
  gen_cmd->add_option("--points", gen.spec.points_per_model, "Points per model");
  gen_cmd->add_option("--crop", gen.spec.crop_fraction, "Fraction of query points removed by a half-space cut");
  gen_cmd->add_option("--noise", gen.spec.noise_sigma, "Gaussian noise sigma on query points");
  gen_cmd->add_option("--outlier-frac", gen.spec.outlier_fraction, "Uniform outliers per query point (max 0.2)");
  gen_cmd->add_option("--jitter", gen.spec.instance_jitter, "Per-instance relative dimension jitter");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time the retrieval stages");
  bench_cmd->add_option("db_dir", bench.db_dir, "Database directory")->required()->check(CLI::ExistingDirectory);
  bench_cmd->add_option("manifest", bench.manifest, "Manifest with queries")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--k-list", bench.k_list, "Candidate counts to time")->delimiter(',')->check(CLI::PositiveNumber);
  metric_option(bench_cmd);
  bench_cmd->add_flag("--normalize-query", bench.normalize_query, "Normalize queries");
  bench_cmd->add_option("--max-queries", bench.max_queries, "Limit the number of queries (0 = all)");
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (0 = default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*build_cmd) return run_build_db(build, out);
    if (*query_cmd) {
      query.json = query_format == "json";
      query.metric = metric_of(query_cmd);
      return run_query(query, out);
    }
    if (*eval_cmd) {
      evaluate_opts.metric = metric_of(eval_cmd);
      return run_evaluate(evaluate_opts, out);
    }
    if (*gen_cmd) return run_gen_synthetic(gen, out);
    if (*bench_cmd) {
      bench.metric = metric_of(bench_cmd);
      return run_bench(bench, out);
    }
  } catch (const Error& e) {
    err << "shape_rerank: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "shape_rerank: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace shape_rerank::cli
