#include <gtest/gtest.h>

#include <bit>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "oracle.hpp"
#include "shape_rerank/errors.hpp"
#include "shape_rerank/point_cloud.hpp"
#include "shape_rerank/point_cloud_io.hpp"
#include "temp_dir.hpp"

using namespace shape_rerank;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::InvalidArgument;
}

PointCloud xyz(const std::string& text) {
  std::istringstream in(text);
  return read_xyz(in, "t");
}

}  // namespace

TEST(PointCloudTest, RejectsEmptyAndNonFinite) {
  EXPECT_EQ(kind_of([] { PointCloud("a", {}); }), ErrorKind::EmptyCloud);
  EXPECT_EQ(kind_of([] { PointCloud("a", {{0, 0, std::numeric_limits<double>::infinity()}}); }),
            ErrorKind::NonFiniteCoordinate);
}

TEST(XyzReaderTest, ReadsPointsInFileOrder) {
  const auto cloud = xyz("0 0 0\n1 0 0\n0 1 0\n");
  ASSERT_EQ(cloud.size(), 3u);
  EXPECT_EQ(cloud[1], (Vec3{1, 0, 0}));
  EXPECT_EQ(cloud[2], (Vec3{0, 1, 0}));
}

TEST(XyzReaderTest, SkipsCommentsAndBlankLines) {
  const auto cloud = xyz("# header\n\n  1.5 -2 3e-1  \n# trailing\n");
  ASSERT_EQ(cloud.size(), 1u);
  EXPECT_EQ(cloud[0], (Vec3{1.5, -2, 0.3}));
}

TEST(XyzReaderTest, ErrorPaths) {
  EXPECT_EQ(kind_of([] { xyz(""); }), ErrorKind::EmptyCloud);
  EXPECT_EQ(kind_of([] { xyz("# only a comment\n"); }), ErrorKind::EmptyCloud);
  EXPECT_EQ(kind_of([] { xyz("0 0 nan\n"); }), ErrorKind::NonFiniteCoordinate);
  EXPECT_EQ(kind_of([] { xyz("0 0 inf\n"); }), ErrorKind::NonFiniteCoordinate);
  EXPECT_EQ(kind_of([] { xyz("0 0\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { xyz("0 0 0 0\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { xyz("0 0 x\n"); }), ErrorKind::ParseError);
}

TEST(XyzReaderTest, ErrorMessageCarriesLineNumber) {
  try {
    std::istringstream in("0 0 0\n1 2 oops\n");
    read_xyz(in, "t", "cloud.xyz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("cloud.xyz:2"), std::string::npos) << e.what();
  }
}

TEST(XyzReaderTest, LoadUsesFileStemAsId) {
  test_support::TempDir dir;
  std::ofstream(dir / "chair_001.xyz") << "0 0 0\n1 0 0\n0 1 0\n";
  const auto cloud = load_point_cloud(dir / "chair_001.xyz");
  EXPECT_EQ(cloud.id(), "chair_001");
  EXPECT_EQ(cloud.size(), 3u);
  EXPECT_EQ(kind_of([&] { load_point_cloud(dir / "missing.xyz"); }), ErrorKind::IoError);
}

TEST(XyzWriterTest, RoundTripIsBitIdentical) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::uniform_int_distribution<int> exponent(-300, 300);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> pts(50);
    for (auto& p : pts) {
      p = {u(rng), std::ldexp(u(rng), exponent(rng)), u(rng) * 1e-7};
    }
    const PointCloud original("r", pts);
    std::stringstream buffer;
    write_xyz(buffer, original);
    const auto back = read_xyz(buffer, "r");
    ASSERT_EQ(back.size(), original.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      ASSERT_EQ(std::bit_cast<std::uint64_t>(back[i].x), std::bit_cast<std::uint64_t>(original[i].x));
      ASSERT_EQ(std::bit_cast<std::uint64_t>(back[i].y), std::bit_cast<std::uint64_t>(original[i].y));
      ASSERT_EQ(std::bit_cast<std::uint64_t>(back[i].z), std::bit_cast<std::uint64_t>(original[i].z));
    }
  }
}

TEST(PlyReaderTest, ReadsVertexElementWithExtraProperties) {
  std::istringstream in(
      "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\n"
      "property float nx\nproperty float x\nproperty float y\nproperty float z\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n"
      "9 1 2 3\n9 4 5 6\n3 0 1 0\n");
  const auto cloud = read_ply_ascii(in, "p");
  ASSERT_EQ(cloud.size(), 2u);
  EXPECT_EQ(cloud[0], (Vec3{1, 2, 3}));
  EXPECT_EQ(cloud[1], (Vec3{4, 5, 6}));
}

TEST(PlyReaderTest, SkipsElementsBeforeVertices) {
  std::istringstream in(
      "ply\r\nformat ascii 1.0\r\nelement camera 1\r\nproperty float f\r\nelement vertex 1\r\n"
      "property double x\r\nproperty double y\r\nproperty double z\r\nend_header\r\n7\r\n1 1 1\r\n");
  const auto cloud = read_ply_ascii(in, "p");
  ASSERT_EQ(cloud.size(), 1u);
  EXPECT_EQ(cloud[0], (Vec3{1, 1, 1}));
}

TEST(PlyReaderTest, ErrorPaths) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    read_ply_ascii(in, "p");
  };
  EXPECT_EQ(kind_of([&] { parse("xyz\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { parse("ply\nformat binary_little_endian 1.0\nend_header\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { parse("ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\n"); }),
            ErrorKind::ParseError);
  const std::string header = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  EXPECT_EQ(kind_of([&] { parse(header + "0 0 0\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { parse(header + "0 0 0\n0 nan 0\n"); }), ErrorKind::NonFiniteCoordinate);
  EXPECT_EQ(kind_of([&] { parse("ply\nformat ascii 1.0\nelement vertex 0\nproperty float x\nproperty float y\nproperty float z\nend_header\n"); }),
            ErrorKind::EmptyCloud);
}

TEST(PlyReaderTest, FormatFromExtension) {
  EXPECT_EQ(format_from_path("a/b.PLY"), CloudFormat::PlyAscii);
  EXPECT_EQ(format_from_path("a/b.xyz"), CloudFormat::XyzText);
  EXPECT_EQ(parse_cloud_format("ply-ascii"), CloudFormat::PlyAscii);
  EXPECT_FALSE(parse_cloud_format("obj").has_value());
}

TEST(NormalizeTest, Examples) {
  EXPECT_EQ(kind_of([] { normalize(PointCloud("d", {{1, 1, 1}, {1, 1, 1}})); }), ErrorKind::DegenerateCloud);

  const auto same = normalize(PointCloud("a", {{-1, 0, 0}, {1, 0, 0}}));
  EXPECT_EQ(same[0], (Vec3{-1, 0, 0}));
  EXPECT_EQ(same[1], (Vec3{1, 0, 0}));

  const auto shifted = normalize(PointCloud("b", {{0, 0, 0}, {2, 0, 0}}));
  EXPECT_EQ(shifted[0], (Vec3{-1, 0, 0}));
  EXPECT_EQ(shifted[1], (Vec3{1, 0, 0}));
  EXPECT_EQ(shifted.id(), "b");
}

TEST(NormalizeTest, CentroidAndRadiusInvariantsAndIdempotence) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 80.0);
  std::uniform_int_distribution<std::size_t> size(2, 400);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3> pts(size(rng));
    for (auto& p : pts) p = {u(rng), u(rng) * 0.1, u(rng) + 1000.0};
    const auto once = normalize(PointCloud("n", pts));
    const Vec3 c = once.centroid();
    EXPECT_NEAR(c.x, 0.0, 1e-9);
    EXPECT_NEAR(c.y, 0.0, 1e-9);
    EXPECT_NEAR(c.z, 0.0, 1e-9);
    EXPECT_NEAR(once.max_norm(), 1.0, 1e-9);

    const auto twice = normalize(once);
    for (std::size_t i = 0; i < once.size(); ++i) {
      ASSERT_NEAR(twice[i].x, once[i].x, 1e-9);
      ASSERT_NEAR(twice[i].y, once[i].y, 1e-9);
      ASSERT_NEAR(twice[i].z, once[i].z, 1e-9);
    }
  }
}

TEST(DownsampleTest, Examples) {
  std::mt19937_64 rng(5);
  const auto ten = oracle::random_ball_cloud(rng, 10);
  EXPECT_EQ(downsample(ten, 20, 1), ten);
  EXPECT_EQ(downsample(ten, 10, 1), ten);

  const auto a = downsample(ten, 4, 7);
  const auto b = downsample(ten, 4, 7);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 4u);

  EXPECT_EQ(kind_of([&] { downsample(ten, 0, 1); }), ErrorKind::InvalidArgument);
}

TEST(DownsampleTest, ReturnsDistinctSubsetOfInput) {
  std::mt19937_64 rng(6);
  const auto cloud = oracle::random_ball_cloud(rng, 2048);
  std::set<std::tuple<double, double, double>> input;
  for (const auto& p : cloud.points()) input.emplace(p.x, p.y, p.z);
  ASSERT_EQ(input.size(), 2048u);

  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    const auto sub = downsample(cloud, 1024, seed);
    ASSERT_EQ(sub.size(), 1024u);
    std::set<std::tuple<double, double, double>> seen;
    for (const auto& p : sub.points()) {
      EXPECT_TRUE(input.contains({p.x, p.y, p.z}));
      seen.emplace(p.x, p.y, p.z);
    }
    EXPECT_EQ(seen.size(), 1024u);
  }
  EXPECT_NE(downsample(cloud, 1024, 1), downsample(cloud, 1024, 2));
}
