#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracle.hpp"
#include "shape_rerank/database.hpp"
#include "shape_rerank/errors.hpp"
#include "shape_rerank/metrics.hpp"
#include "shape_rerank/pipeline.hpp"

using namespace shape_rerank;

namespace {

PointCloud shifted(const PointCloud& c, double dx, const std::string& id) {
  std::vector<Vec3> pts;
  for (const auto& p : c.points()) pts.push_back(p + Vec3{dx, 0, 0});
  return PointCloud(id, pts);
}

// Database of translated copies of one cloud; model i sits at offset offsets[i].
struct Fixture {
  Database db;
  FeatureSet features;
  PointCloud base;

  Fixture(std::mt19937_64& rng, const std::vector<double>& offsets, std::size_t points = 200)
      : base(oracle::random_ball_cloud(rng, points, "base")) {
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      db.add(shifted(base, offsets[i], oracle::model_id(i)), "cat" + std::to_string(i % 3));
      features.insert(oracle::model_id(i), oracle::random_feature(rng, 8));
    }
  }
};

CandidateSet feature_candidates(const std::vector<std::string>& ids) {
  std::vector<Candidate> entries;
  for (std::size_t i = 0; i < ids.size(); ++i) entries.push_back({ids[i], 0.1 * static_cast<double>(i + 1)});
  return make_candidate_set(entries, ScoreKind::FeatureDistance);
}

}  // namespace

TEST(CandidateSetTest, SortsByScoreThenId) {
  const auto set = make_candidate_set({{"c", 1.0}, {"b", 0.5}, {"a", 1.0}}, ScoreKind::GeometricDistance);
  EXPECT_EQ(set.ids(), (std::vector<std::string>{"b", "a", "c"}));
  EXPECT_TRUE(set.is_well_ordered());
  EXPECT_EQ(set.position_of("c"), 2u);
  EXPECT_FALSE(set.position_of("z").has_value());

  CandidateSet bad{ScoreKind::FeatureDistance, {{"a", 1.0}, {"b", 0.5}}};
  EXPECT_FALSE(bad.is_well_ordered());
  CandidateSet dup{ScoreKind::FeatureDistance, {{"a", 1.0}, {"a", 2.0}}};
  EXPECT_FALSE(dup.is_well_ordered());
}

TEST(RankTest, ReturnsKOfLargeDatabase) {
  std::mt19937_64 rng(1);
  FeatureSet set;
  for (std::size_t i = 0; i < 2827; ++i) set.insert(oracle::model_id(i), oracle::random_feature(rng, 16));
  const FeatureIndex index(set);
  const auto query = oracle::random_feature(rng, 16);
  const auto top = rank(query, index, 90);
  EXPECT_EQ(top.size(), 90u);
  EXPECT_TRUE(top.is_well_ordered());
  EXPECT_EQ(top.entries, oracle::knn(set, query, 90));
  EXPECT_EQ(rank(query, index, 5000).size(), 2827u);
}

TEST(RerankTest, SingletonIsUnchangedInOrder) {
  std::mt19937_64 rng(2);
  Fixture f(rng, {0.5});
  const auto out = rerank(f.base, feature_candidates({"m000000"}), f.db, Metric::Mscd, 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.entries[0].id, "m000000");
  EXPECT_EQ(out.kind, ScoreKind::GeometricDistance);
}

TEST(RerankTest, QueryIdenticalToCandidateScoresZeroAndComesFirst) {
  std::mt19937_64 rng(3);
  Fixture f(rng, {0.4, 0.0, 0.2});
  const auto out = rerank(f.base, feature_candidates({"m000000", "m000002", "m000001"}), f.db, Metric::Mscd, 1);
  EXPECT_EQ(out.entries[0].id, "m000001");
  EXPECT_EQ(out.entries[0].score, 0.0);
}

TEST(RerankTest, OrdersByMetric) {
  // Three candidates with distinct geometric distances 0.5 > 0.3 > 0.1 in
  // feature order; a single-point query makes MSCD equal the offset.
  Database db;
  db.add(PointCloud("first", {{0.5, 0, 0}}), "x");
  db.add(PointCloud("second", {{0.1, 0, 0}}), "x");
  db.add(PointCloud("third", {{0.3, 0, 0}}), "x");
  const PointCloud query("q", {{0, 0, 0}});
  const auto in = make_candidate_set({{"first", 0.1}, {"second", 0.2}, {"third", 0.3}}, ScoreKind::FeatureDistance);
  const auto out = rerank(query, in, db, Metric::Mscd, 1);
  EXPECT_EQ(out.ids(), (std::vector<std::string>{"second", "third", "first"}));
  EXPECT_NEAR(out.entries[0].score, 0.1, 1e-15);
  EXPECT_NEAR(out.entries[1].score, 0.3, 1e-15);
  EXPECT_NEAR(out.entries[2].score, 0.5, 1e-15);
}

TEST(RerankTest, IsPermutationSortedByMetric) {
  std::mt19937_64 rng(4);
  std::vector<double> offsets(40);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& o : offsets) o = u(rng);
  Fixture f(rng, offsets, 150);
  std::vector<std::string> ids = f.db.ids();
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto in = feature_candidates(ids);
  for (auto metric : {Metric::Cd, Metric::Scd, Metric::Mscd}) {
    const auto out = rerank(f.base, in, f.db, metric, 1);
    auto a = in.ids();
    auto b = out.ids();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
    EXPECT_TRUE(out.is_well_ordered());
    for (const auto& c : out.entries) {
      EXPECT_EQ(c.score, point_set_distance(metric, f.base, f.db.cloud(c.id), Backend::KdTree, 1));
    }
  }
}

TEST(RerankTest, GroundTruthAtFeaturePositionFiveMovesToTop) {
  std::mt19937_64 rng(5);
  Fixture f(rng, {0.6, 0.5, 0.7, 0.8, 0.0, 0.9, 0.4});
  const auto in = feature_candidates({"m000000", "m000001", "m000002", "m000003", "m000004", "m000005", "m000006"});
  ASSERT_EQ(in.position_of("m000004"), 4u);
  const auto out = rerank(shifted(f.base, 0.001, "q"), in, f.db, Metric::Mscd, 1);
  EXPECT_EQ(out.position_of("m000004"), 0u);
}

TEST(RerankTest, IndependentOfThreadCount) {
  std::mt19937_64 rng(6);
  std::vector<double> offsets(90);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (auto& o : offsets) o = u(rng);
  Fixture f(rng, offsets, 300);
  const auto in = feature_candidates(f.db.ids());
  const auto query = shifted(f.base, 0.05, "q");
  for (auto metric : {Metric::Cd, Metric::Scd, Metric::Mscd}) {
    const auto one = rerank(query, in, f.db, metric, 1);
    for (unsigned t : {2u, 8u}) EXPECT_EQ(rerank(query, in, f.db, metric, t).entries, one.entries);
  }
}

TEST(RerankTest, UnknownCandidateIsRejected) {
  std::mt19937_64 rng(7);
  Fixture f(rng, {0.0});
  try {
    rerank(f.base, feature_candidates({"m000000", "ghost"}), f.db, Metric::Mscd, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownModelId);
  }
}

TEST(RetrieveTest, WithoutRerankFinalEqualsInitial) {
  std::mt19937_64 rng(8);
  Fixture f(rng, {0.1, 0.2, 0.3, 0.4});
  const FeatureIndex index(f.features);
  RetrievalConfig config;
  config.k = 3;
  config.rerank = false;
  const auto r = retrieve(f.base, oracle::random_feature(rng, 8), index, f.db, config);
  EXPECT_EQ(r.query_id, "base");
  EXPECT_EQ(r.initial.size(), 3u);
  EXPECT_EQ(r.final.entries, r.initial.entries);
  EXPECT_EQ(r.final.kind, ScoreKind::FeatureDistance);
}

TEST(RetrieveTest, SingleModelDatabase) {
  std::mt19937_64 rng(9);
  Fixture f(rng, {0.3});
  const FeatureIndex index(f.features);
  const auto r = retrieve(f.base, oracle::random_feature(rng, 8), index, f.db, RetrievalConfig{});
  ASSERT_EQ(r.final.size(), 1u);
  EXPECT_EQ(r.final.entries[0].id, "m000000");
  EXPECT_EQ(r.final.entries[0].score, mscd(f.base, f.db.cloud("m000000")));
  EXPECT_GT(r.final.entries[0].score, 0.0);
}

TEST(RetrieveTest, InvalidConfig) {
  RetrievalConfig config;
  config.k = 0;
  EXPECT_THROW(config.validate(), Error);
}

TEST(DatabaseTest, CachesSpatialIndices) {
  std::mt19937_64 rng(10);
  Fixture f(rng, {0.0, 0.1, 0.2});
  EXPECT_EQ(f.db.cached_index_count(), 0u);
  const auto a = f.db.spatial_index("m000001");
  EXPECT_EQ(f.db.spatial_index("m000001"), a);
  EXPECT_EQ(f.db.cached_index_count(), 1u);
  f.db.warm_spatial_indices(2);
  EXPECT_EQ(f.db.cached_index_count(), 3u);
  f.db.clear_spatial_index_cache();
  EXPECT_EQ(f.db.cached_index_count(), 0u);
  EXPECT_THROW(f.db.spatial_index("nope"), Error);
  EXPECT_THROW(f.db.add(PointCloud("m000000", {{0, 0, 0}}), "x"), Error);
  EXPECT_THROW(f.db.add(PointCloud("new", {{0, 0, 0}}), ""), Error);
  EXPECT_EQ(f.db.category("m000002"), "cat2");
}
