#include <gtest/gtest.h>

#include <cmath>

#include "shape_rerank/errors.hpp"
#include "shape_rerank/metrics.hpp"
#include "shape_rerank/synthetic.hpp"

using namespace shape_rerank;

namespace {

SyntheticSpec small_spec() {
  SyntheticSpec spec;
  spec.models = 20;
  spec.classes = 4;
  spec.queries = 8;
  spec.points_per_model = 300;
  return spec;
}

}  // namespace

TEST(SyntheticTest, CountsMatchParameters) {
  const auto spec = small_spec();
  const auto data = generate_synthetic(spec, 1);
  EXPECT_EQ(data.database.size(), 20u);
  EXPECT_EQ(data.queries.size(), 8u);
  EXPECT_EQ(data.ground_truth.model_of.size(), 8u);
  for (const auto& id : data.database.ids()) {
    const auto& c = data.database.cloud(id);
    EXPECT_EQ(c.size(), 300u);
    EXPECT_NEAR(c.max_norm(), 1.0, 1e-9);
    EXPECT_NEAR(std::sqrt(squared_norm(c.centroid())), 0.0, 1e-9);
  }
  data.ground_truth.validate_against(data.database);
  // 30% crop of 300 points.
  EXPECT_EQ(data.queries[0].size(), 210u);
}

TEST(SyntheticTest, ClassesAreRoundRobinFamilies) {
  const auto data = generate_synthetic(small_spec(), 1);
  EXPECT_EQ(data.database.category("m0000"), "c00_box");
  EXPECT_EQ(data.database.category("m0001"), "c01_cylinder");
  EXPECT_EQ(data.database.category("m0006"), "c02_ellipsoid");
  EXPECT_EQ(data.database.category("m0003"), "c03_lshape");
}

TEST(SyntheticTest, DeterministicPerSeed) {
  const auto a = generate_synthetic(small_spec(), 7);
  const auto b = generate_synthetic(small_spec(), 7);
  const auto c = generate_synthetic(small_spec(), 8);
  for (const auto& id : a.database.ids()) EXPECT_EQ(a.database.cloud(id), b.database.cloud(id));
  for (std::size_t i = 0; i < a.queries.size(); ++i) EXPECT_EQ(a.queries[i], b.queries[i]);
  EXPECT_EQ(a.ground_truth.model_of, b.ground_truth.model_of);
  EXPECT_NE(a.database.cloud("m0000"), c.database.cloud("m0000"));
}

TEST(SyntheticTest, OutliersAddFractionOfRemainingPoints) {
  auto spec = small_spec();
  spec.outlier_fraction = 0.1;
  const auto data = generate_synthetic(spec, 3);
  EXPECT_EQ(data.queries[0].size(), 210u + 21u);
}

TEST(SyntheticTest, CleanQueryIsClosestToItsSource) {
  auto spec = small_spec();
  spec.crop_fraction = 0.0;
  spec.noise_sigma = 0.0;
  const auto data = generate_synthetic(spec, 4);
  for (const auto& q : data.queries) {
    const auto& source = data.ground_truth.model(q.id());
    EXPECT_EQ(mscd(q, data.database.cloud(source)), 0.0);
    for (const auto& id : data.database.ids()) {
      if (id != source) EXPECT_GT(mscd(q, data.database.cloud(id)), 0.0);
    }
  }
}

TEST(SyntheticTest, RejectsInvalidSpecs) {
  auto expect_invalid = [](SyntheticSpec spec) {
    try {
      spec.validate();
      ADD_FAILURE() << "accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidSpec);
    }
  };
  auto s = small_spec();
  s.outlier_fraction = 0.5;
  expect_invalid(s);
  s = small_spec();
  s.crop_fraction = 0.95;
  expect_invalid(s);
  s = small_spec();
  s.models = 1;
  expect_invalid(s);
  s = small_spec();
  s.classes = 0;
  expect_invalid(s);
  s = small_spec();
  s.noise_sigma = -1;
  expect_invalid(s);
  EXPECT_THROW(generate_synthetic(s, 1), Error);
}
