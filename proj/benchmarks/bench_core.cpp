#include <benchmark/benchmark.h>

#include <random>

#include "shape_rerank/shape_rerank.hpp"

using namespace shape_rerank;

namespace {

PointCloud random_cloud(std::size_t n, std::uint64_t seed, const std::string& id = "c") {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return PointCloud(id, std::move(pts));
}

FeatureSet random_features(std::size_t count, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  FeatureSet set;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = n(rng);
    set.insert("m" + std::to_string(100000 + i), FeatureVector(std::move(v)));
  }
  return set;
}

}  // namespace

static void BM_SpatialIndexBuild(benchmark::State& state) {
  const auto cloud = random_cloud(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    SpatialIndex index(cloud);
    benchmark::DoNotOptimize(index.node_count());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SpatialIndexBuild)->Arg(2048)->Arg(16384);

static void BM_MscdCachedIndex(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto query = random_cloud(n, 2);
  const SpatialIndex model(random_cloud(n, 3));
  for (auto _ : state) benchmark::DoNotOptimize(mscd(query, model));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MscdCachedIndex)->Arg(512)->Arg(2048);

static void BM_MscdBruteForce(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto query = random_cloud(n, 2);
  const auto model = random_cloud(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(mscd(query, model, Backend::BruteForce));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MscdBruteForce)->Arg(512)->Arg(2048);

static void BM_FeatureKnn(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto features = random_features(2827, dim, 4);
  const FeatureIndex index(features);
  const auto queries = random_features(64, dim, 5);
  for (auto _ : state) {
    for (const auto& [id, q] : queries.features()) benchmark::DoNotOptimize(index.knn(q, 90));
  }
  state.SetItemsProcessed(state.iterations() * 64);
  state.SetLabel(index.uses_kd_tree() ? "kd-tree" : "linear-scan");
}
BENCHMARK(BM_FeatureKnn)->Arg(8)->Arg(32)->Arg(128)->Arg(256);

static void BM_Rerank90(benchmark::State& state) {
  Database db;
  CandidateSet candidates;
  for (std::size_t i = 0; i < 90; ++i) {
    const std::string id = "m" + std::to_string(1000 + i);
    db.add(random_cloud(2048, 10 + i, id), "cat");
    candidates.entries.push_back({id, 0.0});
  }
  db.warm_spatial_indices(1);
  const auto query = random_cloud(2048, 7, "q");
  for (auto _ : state) benchmark::DoNotOptimize(rerank(query, candidates, db, Metric::Mscd, 1));
  state.SetItemsProcessed(state.iterations() * 90 * 2048);
}
BENCHMARK(BM_Rerank90)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
