#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "oracle.hpp"
#include "shape_rerank/errors.hpp"
#include "shape_rerank/feature_index.hpp"
#include "temp_dir.hpp"

using namespace shape_rerank;

namespace {

FeatureSet random_set(std::mt19937_64& rng, std::size_t count, std::size_t dim) {
  FeatureSet set;
  for (std::size_t i = 0; i < count; ++i) set.insert(oracle::model_id(i), oracle::random_feature(rng, dim));
  return set;
}

void expect_matches_oracle(const CandidateSet& got, const std::vector<Candidate>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    ASSERT_EQ(got.entries[i].id, want[i].id) << "position " << i;
    ASSERT_EQ(got.entries[i].score, want[i].score) << "position " << i;
  }
}

std::string serialized(const FeatureIndex& index) {
  std::ostringstream out(std::ios::binary);
  index.write(out);
  return out.str();
}

ErrorKind read_kind(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  try {
    FeatureIndex::read(in);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "corrupt index accepted";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(FeatureIndexTest, SmallExample) {
  FeatureSet set;
  set.insert("a", FeatureVector({0}));
  set.insert("b", FeatureVector({1}));
  set.insert("c", FeatureVector({3}));
  const FeatureIndex index(set);
  const auto got = index.knn(FeatureVector({0.9}), 2);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got.entries[0].id, "b");
  EXPECT_NEAR(got.entries[0].score, 0.1, 1e-12);
  EXPECT_EQ(got.entries[1].id, "a");
  EXPECT_NEAR(got.entries[1].score, 0.9, 1e-12);
  EXPECT_EQ(got.kind, ScoreKind::FeatureDistance);
}

TEST(FeatureIndexTest, ClampsKToDatabaseSize) {
  FeatureSet set;
  set.insert("a", FeatureVector({0}));
  set.insert("b", FeatureVector({1}));
  const FeatureIndex index(set);
  EXPECT_EQ(index.knn(FeatureVector({5}), 10).size(), 2u);
  EXPECT_THROW(index.knn(FeatureVector({5}), 0), Error);
  try {
    index.knn(FeatureVector({5, 1}), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(FeatureIndexTest, MatchesOracleAcrossDimensions) {
  std::mt19937_64 rng(11);
  for (std::size_t dim : {1u, 3u, 8u, 32u, 64u, 256u}) {
    const auto set = random_set(rng, 1000, dim);
    const FeatureIndex index(set);
    EXPECT_EQ(index.uses_kd_tree(), dim <= FeatureIndex::kMaxKdTreeDimension);
    for (int q = 0; q < 100; ++q) {
      const auto query = oracle::random_feature(rng, dim);
      expect_matches_oracle(index.knn(query, 10), oracle::knn(set, query, 10));
    }
  }
}

TEST(FeatureIndexTest, StrategiesAgreeBitwise) {
  std::mt19937_64 rng(12);
  for (std::size_t dim : {4u, 64u}) {
    const auto set = random_set(rng, 700, dim);
    const FeatureIndex tree(set, FeatureIndex::Strategy::KdTree);
    const FeatureIndex scan(set, FeatureIndex::Strategy::LinearScan);
    EXPECT_TRUE(tree.uses_kd_tree());
    EXPECT_FALSE(scan.uses_kd_tree());
    for (int q = 0; q < 50; ++q) {
      const auto query = oracle::random_feature(rng, dim);
      const auto a = tree.knn(query, 90);
      const auto b = scan.knn(query, 90);
      ASSERT_EQ(a.entries, b.entries);
    }
  }
}

TEST(FeatureIndexTest, TiesBreakById) {
  FeatureSet set;
  // Every entry is at distance 1 from the origin, some duplicated exactly.
  set.insert("e", FeatureVector({1, 0}));
  set.insert("b", FeatureVector({0, 1}));
  set.insert("d", FeatureVector({-1, 0}));
  set.insert("a", FeatureVector({0, -1}));
  set.insert("c", FeatureVector({1, 0}));
  for (auto strategy : {FeatureIndex::Strategy::KdTree, FeatureIndex::Strategy::LinearScan}) {
    const FeatureIndex index(set, strategy);
    EXPECT_EQ(index.knn(FeatureVector({0, 0}), 3).ids(), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(index.knn(FeatureVector({2, 0}), 2).ids(), (std::vector<std::string>{"c", "e"}));
  }
}

TEST(FeatureIndexTest, TiesOnQuantizedGrid) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> cell(0, 3);
  FeatureSet set;
  for (std::size_t i = 0; i < 400; ++i) {
    set.insert(oracle::model_id(i), FeatureVector({double(cell(rng)), double(cell(rng)), double(cell(rng))}));
  }
  const FeatureIndex index(set, FeatureIndex::Strategy::KdTree);
  for (int q = 0; q < 30; ++q) {
    const FeatureVector query({double(cell(rng)), double(cell(rng)), double(cell(rng))});
    expect_matches_oracle(index.knn(query, 57), oracle::knn(set, query, 57));
  }
}

TEST(FeatureIndexTest, SmallerKIsPrefix) {
  std::mt19937_64 rng(14);
  const auto set = random_set(rng, 500, 16);
  const FeatureIndex index(set);
  const auto query = oracle::random_feature(rng, 16);
  const auto big = index.knn(query, 90);
  EXPECT_TRUE(big.is_well_ordered());
  for (std::size_t k : {1u, 5u, 30u, 89u}) {
    const auto small = index.knn(query, k);
    ASSERT_EQ(small.size(), k);
    for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(small.entries[i], big.entries[i]);
  }
}

TEST(FeatureIndexTest, PersistenceRoundTrip) {
  std::mt19937_64 rng(15);
  const auto set = random_set(rng, 300, 24);
  const FeatureIndex index(set);
  test_support::TempDir dir;
  index.save(dir / "index.srnk");
  const auto back = FeatureIndex::load(dir / "index.srnk");
  EXPECT_EQ(back.size(), index.size());
  EXPECT_EQ(back.dim(), index.dim());
  EXPECT_EQ(back.ids(), index.ids());
  EXPECT_EQ(serialized(back), serialized(index));
  for (int q = 0; q < 50; ++q) {
    const auto query = oracle::random_feature(rng, 24);
    ASSERT_EQ(back.knn(query, 20).entries, index.knn(query, 20).entries);
  }
}

TEST(FeatureIndexTest, RejectsDamagedFiles) {
  std::mt19937_64 rng(16);
  const auto bytes = serialized(FeatureIndex(random_set(rng, 50, 8)));

  EXPECT_EQ(read_kind(bytes.substr(0, bytes.size() / 2)), ErrorKind::CorruptFile);
  EXPECT_EQ(read_kind(bytes.substr(0, 3)), ErrorKind::CorruptFile);
  EXPECT_EQ(read_kind(""), ErrorKind::CorruptFile);

  auto bumped = bytes;
  bumped[4] = static_cast<char>(FeatureIndex::kFormatVersion + 1);
  EXPECT_EQ(read_kind(bumped), ErrorKind::VersionMismatch);

  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_EQ(read_kind(flipped), ErrorKind::CorruptFile);

  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(read_kind(magic), ErrorKind::CorruptFile);

  EXPECT_EQ(read_kind(bytes + "extra"), ErrorKind::CorruptFile);
}

TEST(FeatureIndexTest, MissingFileIsIoError) {
  try {
    FeatureIndex::load("/nonexistent/index.srnk");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoError);
  }
}
