#include <gtest/gtest.h>

#include <random>

#include "otpl/common/errors.hpp"
#include "otpl/descriptor/line_descriptor.hpp"

namespace otpl {
namespace {

FeatureMap random_map(std::mt19937_64& rng, int depth, int height, int width, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FeatureMap map(depth, height, width, scale);
  for (double& v : map.data()) v = u(rng);
  return map;
}

FeatureMap constant_map(const VecX& value, int height, int width, double scale) {
  FeatureMap map(static_cast<int>(value.size()), height, width, scale);
  for (int c = 0; c < map.depth(); ++c)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) map.at(c, y, x) = value[c];
  return map;
}

// Four-neighbour interpolation written out per channel.
VecX brute_bilinear(const FeatureMap& map, const Vec2& image_point) {
  const double gx = image_point.x() * map.scale();
  const double gy = image_point.y() * map.scale();
  const int x0 = std::min(static_cast<int>(gx), map.width() - 2);
  const int y0 = std::min(static_cast<int>(gy), map.height() - 2);
  const double fx = gx - x0;
  const double fy = gy - y0;
  VecX out(map.depth());
  for (int c = 0; c < map.depth(); ++c) {
    out[c] = (1 - fx) * (1 - fy) * map.at(c, y0, x0) + fx * (1 - fy) * map.at(c, y0, x0 + 1) +
             (1 - fx) * fy * map.at(c, y0 + 1, x0) + fx * fy * map.at(c, y0 + 1, x0 + 1);
  }
  return out;
}

TEST(FeatureMapTest, RejectsWrongDataLength) {
  EXPECT_THROW(FeatureMap(2, 3, 4, 1.0, std::vector<double>(23)), InvalidInput);
  EXPECT_NO_THROW(FeatureMap(2, 3, 4, 1.0, std::vector<double>(24)));
}

TEST(SampleBilinearTest, GridNodeReturnsNode) {
  std::mt19937_64 rng(1);
  const FeatureMap map = random_map(rng, 4, 6, 8, 0.5);
  const VecX v = sample_bilinear(map, Vec2(6.0, 4.0));  // grid (3, 2)
  for (int c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(v[c], map.at(c, 2, 3));
}

TEST(SampleBilinearTest, MidpointAveragesNeighbours) {
  FeatureMap map(2, 2, 2, 1.0);
  map.at(0, 0, 1) = 2.0;
  map.at(0, 1, 1) = 2.0;
  const VecX v = sample_bilinear(map, Vec2(0.5, 0.0));
  EXPECT_DOUBLE_EQ(v[0], 1.0);
  EXPECT_DOUBLE_EQ(v[1], 0.0);
}

TEST(SampleBilinearTest, MatchesPerChannelOracle) {
  std::mt19937_64 rng(2);
  const FeatureMap map = random_map(rng, 5, 10, 12, 0.25);
  std::uniform_real_distribution<double> ux(0.0, 11.0 / 0.25);
  std::uniform_real_distribution<double> uy(0.0, 9.0 / 0.25);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 p(ux(rng), uy(rng));
    EXPECT_LE((sample_bilinear(map, p) - brute_bilinear(map, p)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SampleBilinearTest, OutsideGridThrows) {
  const FeatureMap map(1, 4, 4, 1.0);
  EXPECT_THROW(sample_bilinear(map, Vec2(3.5, 1.0)), OutOfBounds);
  EXPECT_THROW(sample_bilinear(map, Vec2(-0.1, 1.0)), OutOfBounds);
}

TEST(PoolSegmentTest, ConstantMapGivesNormalizedValue) {
  const VecX value = (VecX(3) << 1.0, -2.0, 2.0).finished();
  const FeatureMap map = constant_map(value, 20, 20, 0.5);
  const VecX f = pool_segment(map, LineSegment2D(Vec2(1, 1), Vec2(30, 25)), 100);
  EXPECT_LE((f - value / 3.0).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((f - sample_bilinear(map, Vec2(7, 9)).normalized()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PoolSegmentTest, TwoSamplesUseEndpoints) {
  std::mt19937_64 rng(3);
  const FeatureMap map = random_map(rng, 6, 16, 16, 1.0);
  const LineSegment2D seg(Vec2(2.5, 3.25), Vec2(11.0, 9.5));
  const VecX expected = (brute_bilinear(map, seg.start()) + brute_bilinear(map, seg.end())).normalized();
  EXPECT_LE((pool_segment(map, seg, 2) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PoolSegmentTest, MatchesDirectSummation) {
  std::mt19937_64 rng(4);
  const FeatureMap map = random_map(rng, 8, 30, 40, 0.125);
  std::uniform_real_distribution<double> ux(0.0, 39.0 / 0.125);
  std::uniform_real_distribution<double> uy(0.0, 29.0 / 0.125);
  for (int trial = 0; trial < 50; ++trial) {
    const LineSegment2D seg(Vec2(ux(rng), uy(rng)), Vec2(ux(rng), uy(rng)));
    if (seg.length() < 1.0) continue;
    VecX sum = VecX::Zero(8);
    for (int k = 0; k < 100; ++k) {
      const double t = k / 99.0;
      sum += brute_bilinear(map, seg.start() + t * (seg.end() - seg.start()));
    }
    EXPECT_LE((pool_segment(map, seg, 100) - sum.normalized()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(PoolSegmentTest, ClampsSamplesOutsideTheGrid) {
  const VecX value = (VecX(2) << 3.0, 4.0).finished();
  const FeatureMap map = constant_map(value, 8, 8, 1.0);
  const VecX f = pool_segment(map, LineSegment2D(Vec2(-5, 2), Vec2(12, 3)), 10);
  EXPECT_LE((f - value / 5.0).norm(), 1e-12);
}

TEST(PoolSegmentTest, ZeroMapIsDegenerate) {
  const FeatureMap map(4, 8, 8, 1.0);
  EXPECT_THROW(pool_segment(map, LineSegment2D(Vec2(1, 1), Vec2(6, 6)), 10), DegenerateDescriptor);
}

TEST(PointDensityTest, EmptyKeypointsGiveZero) {
  EXPECT_EQ(local_point_density(LineSegment2D(Vec2(0, 0), Vec2(100, 0)), {}, 3.0), 0.0);
}

TEST(PointDensityTest, CountsNearbyKeypointsPerPixel) {
  const std::vector<Vec2> kps = {Vec2(10, 0.5), Vec2(30, -0.9), Vec2(50, 0.0), Vec2(70, 1.0),
                                 Vec2(90, -0.2), Vec2(50, 10.0), Vec2(120, 0.0)};
  EXPECT_DOUBLE_EQ(local_point_density(LineSegment2D(Vec2(0, 0), Vec2(100, 0)), kps, 3.0), 0.05);
}

TEST(PointDensityTest, DistanceEqualToRadiusIsExcluded) {
  const LineSegment2D seg(Vec2(0, 0), Vec2(10, 0));
  const std::vector<Vec2> at_radius = {Vec2(5, 3.0)};
  const std::vector<Vec2> inside = {Vec2(5, 2.999)};
  EXPECT_EQ(local_point_density(seg, at_radius, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(local_point_density(seg, inside, 3.0), 0.1);
}

TEST(BranchWeightsTest, SpotValues) {
  const BranchWeights zero = branch_weights(0.0, 0.1);
  EXPECT_EQ(zero.gamma_pt, 0.0);
  EXPECT_EQ(zero.gamma_line, 1.0);
  const BranchWeights even = branch_weights(0.1, 0.1);
  EXPECT_DOUBLE_EQ(even.gamma_pt, 0.5);
  EXPECT_DOUBLE_EQ(even.gamma_line, 0.5);
  const BranchWeights dense = branch_weights(0.3, 0.1);
  EXPECT_NEAR(dense.gamma_pt, 0.75, 1e-15);
  EXPECT_NEAR(dense.gamma_line, 0.25, 1e-15);
}

TEST(BranchWeightsTest, MonotoneAndNormalized) {
  double last_pt = -1.0;
  double last_line = 2.0;
  for (int k = 0; k <= 100; ++k) {
    const BranchWeights w = branch_weights(0.01 * k, 0.1);
    EXPECT_NEAR(w.gamma_pt + w.gamma_line, 1.0, 1e-12);
    EXPECT_GT(w.gamma_pt, last_pt);
    EXPECT_LT(w.gamma_line, last_line);
    last_pt = w.gamma_pt;
    last_line = w.gamma_line;
  }
}

class BuildDescriptorTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng{5};
  DescriptorConfig cfg;
  FeatureMap line_map = random_map(rng, 16, 30, 40, 0.125);
  FeatureMap point_map = random_map(rng, 16, 30, 40, 0.125);
  LineSegment2D seg{Vec2(20, 30), Vec2(200, 150)};
};

TEST_F(BuildDescriptorTest, NoKeypointsUsesLineBranchOnly) {
  const LineDescriptor d = build_descriptor(line_map, point_map, seg, {}, cfg);
  EXPECT_EQ(d.gamma_pt, 0.0);
  EXPECT_LE((d.vector.head(16) - pool_segment(line_map, seg, 100)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(d.vector.tail(16).norm(), 0.0);
}

TEST_F(BuildDescriptorTest, EqualWeightsAndMapsGiveEqualBlocks) {
  // Ten keypoints along a 100 px segment: rho = 0.1 = rho_0.
  const LineSegment2D s(Vec2(20, 30), Vec2(120, 30));
  std::vector<Vec2> kps;
  for (int k = 0; k < 10; ++k) kps.emplace_back(25 + 10 * k, 31);
  const LineDescriptor d = build_descriptor(line_map, line_map, s, kps, cfg);
  EXPECT_DOUBLE_EQ(d.gamma_pt, 0.5);
  EXPECT_LE((d.vector.head(16) - d.vector.tail(16)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(d.vector.norm(), 1.0, 1e-12);
}

TEST_F(BuildDescriptorTest, DeterministicAndUnitNorm) {
  std::vector<Vec2> kps;
  std::uniform_real_distribution<double> u(0.0, 300.0);
  for (int k = 0; k < 40; ++k) kps.emplace_back(u(rng), u(rng) * 0.7);
  const LineDescriptor a = build_descriptor(line_map, point_map, seg, kps, cfg);
  const LineDescriptor b = build_descriptor(line_map, point_map, seg, kps, cfg);
  EXPECT_EQ(a.vector, b.vector);
  EXPECT_NEAR(a.vector.norm(), 1.0, 1e-9);
  EXPECT_NEAR(a.gamma_line + a.gamma_pt, 1.0, 1e-12);
}

TEST_F(BuildDescriptorTest, GainLeavesDescriptorUnchanged) {
  std::vector<Vec2> kps = {Vec2(100, 82), Vec2(50, 52)};
  const LineDescriptor before = build_descriptor(line_map, point_map, seg, kps, cfg);
  FeatureMap bright_line = line_map;
  FeatureMap bright_point = point_map;
  bright_line.apply_gain_bias(3.7, 0.0);
  bright_point.apply_gain_bias(3.7, 0.0);
  const LineDescriptor after = build_descriptor(bright_line, bright_point, seg, kps, cfg);
  EXPECT_LE((before.vector - after.vector).cwiseAbs().maxCoeff(), 1e-9);
}

TEST_F(BuildDescriptorTest, DegenerateBranchFallsBack) {
  const FeatureMap zero(16, 30, 40, 0.125);
  std::vector<Vec2> kps = {Vec2(100, 82)};
  const LineDescriptor d = build_descriptor(line_map, zero, seg, kps, cfg);
  EXPECT_EQ(d.gamma_line, 1.0);
  EXPECT_EQ(d.vector.tail(16).norm(), 0.0);
  EXPECT_THROW(build_descriptor(zero, zero, seg, kps, cfg), DegenerateDescriptor);
}

TEST(DescriptorConfigTest, RejectsInvalidValues) {
  DescriptorConfig cfg;
  cfg.n_samples = 1;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.rho_0 = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
}

}  // namespace
}  // namespace otpl
