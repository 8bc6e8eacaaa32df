#include <gtest/gtest.h>

#include <cmath>

#include "otpl/common/errors.hpp"
#include "otpl/geometry/residuals.hpp"
#include "otpl/optimizer/levenberg_marquardt.hpp"
#include "otpl/optimizer/sliding_window.hpp"
#include "scenes.hpp"

namespace otpl {
namespace {

using test::GraphSpec;
using test::make_graph_scene;

double max_translation_error(const FactorGraph& a, const FactorGraph& b) {
  double worst = 0.0;
  for (const auto& [id, v] : a.poses) {
    worst = std::max(worst, (v.pose.inverse().translation() - b.poses.at(id).pose.inverse().translation()).norm());
  }
  return worst;
}

double max_rotation_error(const FactorGraph& a, const FactorGraph& b) {
  double worst = 0.0;
  for (const auto& [id, v] : a.poses) worst = std::max(worst, rotation_distance(v.pose, b.poses.at(id).pose));
  return worst;
}

// A line along camera x through (0, 0, 1) projects onto the image row v = cy.
FactorGraph single_line_graph(double weight, double robust_delta) {
  FactorGraph g;
  g.poses[0] = {PoseSE3::identity(), true};
  g.lines[0] = {PluckerLine::from_points(Vec3(0, 0, 1), Vec3(1, 0, 1)), false};
  const double cy = g.camera.cy;
  g.line_factors.push_back({0, 0, Eye::Left, LineSegment2D(Vec2(5, cy + 3), Vec2(9, cy - 2)), weight, robust_delta});
  return g;
}

TEST(HuberTest, QuadraticInsideLinearOutside) {
  EXPECT_EQ(huber_loss(3.0, 2.0), 3.0);
  EXPECT_DOUBLE_EQ(huber_loss(9.0, 2.0), 2 * 2 * 3 - 4);
  EXPECT_EQ(huber_loss_derivative(3.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(huber_loss_derivative(9.0, 2.0), 2.0 / 3.0);
}

TEST(TotalCostTest, SingleLineFactorHandValue) {
  EXPECT_NEAR(total_cost(single_line_graph(0.5, 10.0)), 0.5 * 13.0, 1e-9);
}

TEST(TotalCostTest, DoublingWeightsDoublesLineTerm) {
  GraphSpec spec;
  spec.pixel_sigma = 1.0;
  FactorGraph g = make_graph_scene(spec).graph;
  const CostBreakdown before = evaluate_cost(g);
  for (LineFactor& f : g.line_factors) f.weight *= 2.0;
  const CostBreakdown after = evaluate_cost(g);
  EXPECT_EQ(after.line, 2.0 * before.line);
  EXPECT_EQ(after.point, before.point);
}

TEST(TotalCostTest, GroundTruthHasZeroCost) {
  const FactorGraph g = make_graph_scene(GraphSpec{}).truth;
  EXPECT_LE(total_cost(g), 1e-12);
}

TEST(TotalCostTest, DegenerateFactorsAreSkippedAndCounted) {
  FactorGraph g = single_line_graph(1.0, 2.0);
  g.lines[1] = {PluckerLine{Vec3::Zero(), Vec3::UnitZ()}, false};
  g.line_factors.push_back({0, 1, Eye::Left, LineSegment2D(Vec2(0, 0), Vec2(5, 5)), 1.0, 2.0});
  EXPECT_EQ(evaluate_cost(g).skipped, 1);
}

TEST(GraphTest, ValidateRejectsDanglingFactor) {
  FactorGraph g = single_line_graph(1.0, 2.0);
  g.line_factors[0].line_id = 9;
  EXPECT_THROW(g.validate(), InvalidInput);
}

TEST(GradientTest, FullGraphMatchesFiniteDifferences) {
  GraphSpec spec;
  spec.keyframes = 3;
  spec.n_points = 60;
  spec.n_lines = 20;
  spec.pixel_sigma = 1.0;
  spec.pose_offset = 0.01;
  spec.point_offset = 0.02;
  spec.line_offset = 0.01;
  const FactorGraph g = make_graph_scene(spec).graph;
  const StateLayout layout = StateLayout::of(g);
  const VecX grad = cost_gradient(g, layout);
  const double h = 1e-6;
  for (int k = 0; k < layout.dimension; ++k) {
    VecX d = VecX::Zero(layout.dimension);
    d[k] = h;
    const double fd = (total_cost(retract(g, layout, d)) - total_cost(retract(g, layout, -d))) / (2 * h);
    EXPECT_LE(std::abs(fd - grad[k]) / std::max(1.0, std::abs(fd)), 1e-5) << "coordinate " << k;
  }
}

TEST(OptimizeTest, GroundTruthIsAFixedPoint) {
  FactorGraph g = make_graph_scene(GraphSpec{}).truth;
  const double before = total_cost(g);
  const SolverReport r = optimize(g, SolverConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_LE(std::abs(r.final_cost - before), 1e-12);
}

TEST(OptimizeTest, RecoversPerturbedNoiseFreeScene) {
  GraphSpec spec;
  spec.pose_offset = 0.05;
  spec.point_offset = 0.05;
  spec.line_offset = 0.01;
  test::GraphScene s = make_graph_scene(spec);
  const SolverReport r = optimize(s.graph, SolverConfig{});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.final_cost, r.initial_cost);
  EXPECT_LE(max_translation_error(s.graph, s.truth), 1e-6);
  EXPECT_LE(max_rotation_error(s.graph, s.truth), 1e-7);
}

TEST(OptimizeTest, ResidualRmsMatchesInjectedNoise) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GraphSpec spec;
    spec.seed = seed;
    spec.pixel_sigma = 1.0;
    spec.keyframes = 5;
    FactorGraph g = make_graph_scene(spec).graph;
    optimize(g, SolverConfig{});
    double sum = 0.0;
    int count = 0;
    for (const PointFactor& f : g.point_factors) {
      sum += point_residual_jacobians(g.poses.at(f.pose_id).pose, g.points.at(f.point_id).position,
                                      g.camera, f.eye, f.observed)
                 .residual.squaredNorm() / 2.0;
      ++count;
    }
    for (const LineFactor& f : g.line_factors) {
      sum += line_residual_jacobians(g.poses.at(f.pose_id).pose, g.lines.at(f.line_id).line, g.camera,
                                     f.eye, f.observed)
                 .residual.squaredNorm() / 2.0;
      ++count;
    }
    const double rms = std::sqrt(sum / count);
    EXPECT_GE(rms, 0.7) << "seed " << seed;
    EXPECT_LE(rms, 1.3) << "seed " << seed;
  }
}

TEST(OptimizeTest, GlobalRigidTransformLeavesFinalCostUnchanged) {
  GraphSpec spec;
  spec.pixel_sigma = 1.0;
  spec.keyframes = 5;
  FactorGraph g = make_graph_scene(spec).graph;
  FactorGraph moved = g;
  // World points map through T; poses T_cw compose with T^-1.
  const PoseSE3 t(so3_exp(Vec3(0.3, -0.2, 0.5)), Vec3(1.0, -2.0, 0.5));
  for (auto& [id, v] : moved.poses) v.pose = v.pose * t.inverse();
  for (auto& [id, v] : moved.points) v.position = t * v.position;
  for (auto& [id, v] : moved.lines) {
    v.line = transform_plucker(v.line, t);
    v.anchor = t * v.anchor;
  }
  SolverConfig cfg;
  cfg.relative_decrease = 1e-15;
  cfg.max_iterations = 200;
  optimize(g, cfg);
  optimize(moved, cfg);
  EXPECT_NEAR(total_cost(moved), total_cost(g), 1e-9 * total_cost(g));
}

TEST(OptimizeTest, RequiresGaugeAnchor) {
  FactorGraph g = single_line_graph(1.0, 2.0);
  g.poses[0].fixed = false;
  EXPECT_THROW(optimize(g, SolverConfig{}), InvalidInput);
}

TEST(SolverConfigTest, RejectsInvalidValues) {
  SolverConfig cfg;
  cfg.initial_damping = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = {};
  cfg.max_iterations = 0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
}

KeyframeInsertion keyframe_from(const FactorGraph& source, Id id) {
  KeyframeInsertion kf;
  kf.id = id;
  kf.pose = source.poses.at(id).pose;
  for (const PointFactor& f : source.point_factors) {
    if (f.pose_id != id) continue;
    kf.point_factors.push_back(f);
    kf.new_points[f.point_id] = source.points.at(f.point_id).position;
  }
  for (const LineFactor& f : source.line_factors) {
    if (f.pose_id != id) continue;
    kf.line_factors.push_back(f);
    kf.new_lines[f.line_id] = source.lines.at(f.line_id);
  }
  return kf;
}

class WindowTest : public ::testing::Test {
 protected:
  FactorGraph source = make_graph_scene(GraphSpec{}).truth;

  FactorGraph fill(int count, std::size_t window) {
    FactorGraph g;
    g.camera = source.camera;
    for (Id k = 0; k < count; ++k) {
      KeyframeInsertion kf = keyframe_from(source, k);
      // Landmarks already in the window keep their state.
      std::erase_if(kf.new_points, [&](const auto& p) { return g.points.count(p.first) > 0; });
      std::erase_if(kf.new_lines, [&](const auto& l) { return g.lines.count(l.first) > 0; });
      marginal_window_update(g, std::move(kf), window);
    }
    return g;
  }
};

TEST_F(WindowTest, BelowCapacityKeepsEverything) {
  const FactorGraph g = fill(3, 5);
  EXPECT_EQ(g.poses.size(), 3u);
  std::size_t factors = 0;
  for (const PointFactor& f : source.point_factors) factors += f.pose_id < 3;
  EXPECT_EQ(g.point_factors.size(), factors);
  EXPECT_TRUE(g.poses.at(0).fixed);
}

TEST_F(WindowTest, AtCapacityDropsOldestAndOrphans) {
  const FactorGraph g = fill(6, 5);
  ASSERT_EQ(g.poses.size(), 5u);
  EXPECT_EQ(g.poses.count(0), 0u);
  EXPECT_TRUE(g.poses.at(1).fixed);
  // Recount from the source: factors of frames 1..5 on landmarks seen at least twice there.
  std::map<Id, int> points, lines;
  for (const PointFactor& f : source.point_factors)
    if (f.pose_id >= 1 && f.pose_id <= 5) ++points[f.point_id];
  for (const LineFactor& f : source.line_factors)
    if (f.pose_id >= 1 && f.pose_id <= 5) ++lines[f.line_id];
  std::size_t point_factors = 0, line_factors = 0, live_points = 0, live_lines = 0;
  for (const auto& [id, n] : points)
    if (n >= 2) point_factors += n, ++live_points;
  for (const auto& [id, n] : lines)
    if (n >= 2) line_factors += n, ++live_lines;
  EXPECT_EQ(g.point_factors.size(), point_factors);
  EXPECT_EQ(g.line_factors.size(), line_factors);
  EXPECT_EQ(g.points.size(), live_points);
  EXPECT_EQ(g.lines.size(), live_lines);
  EXPECT_NO_THROW(g.validate());
}

TEST_F(WindowTest, PoseCountIsBounded) {
  for (int k : {1, 4, 7, 10}) EXPECT_EQ(fill(k, 4).poses.size(), std::min<std::size_t>(k, 4));
}

TEST_F(WindowTest, RejectsTinyWindow) {
  FactorGraph g;
  EXPECT_THROW(marginal_window_update(g, keyframe_from(source, 0), 1), InvalidInput);
}

}  // namespace
}  // namespace otpl
