#include <gtest/gtest.h>

#include <random>

#include "otpl/common/errors.hpp"
#include "otpl/geometry/triangulation.hpp"
#include "support.hpp"

namespace otpl {
namespace {

using test::max_relative_error;
using test::random_line;
using test::random_pose;

// Plucker coordinates built directly from two points, without the library.
PluckerLine line_through(const Vec3& p, const Vec3& q) {
  const Vec3 d = (q - p).normalized();
  return {p.cross(d), d};
}

double signed_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 t = (b - a).normalized();
  const Vec2 normal(-t.y(), t.x());
  return normal.dot(p - a);
}

Vec2 project(const CameraModel& cam, const PoseSE3& pose_cw, Eye eye, const Vec3& p_w) {
  return cam.project(eye_pose(pose_cw, eye, cam) * p_w);
}

TEST(PoseTest, ComposeWithInverseIsIdentity) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const PoseSE3 p = random_pose(rng);
    const PoseSE3 id = p * p.inverse();
    EXPECT_LE((id.rotation() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE(id.translation().cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_TRUE(is_rotation(p.rotation()));
  }
}

TEST(PoseTest, RejectsNonOrthonormalRotation) {
  Mat3 m = Mat3::Identity();
  m(0, 0) = 1.01;
  EXPECT_THROW(PoseSE3(m, Vec3::Zero()), InvalidInput);
  EXPECT_THROW(PoseSE3(-Mat3::Identity(), Vec3::Zero()), InvalidInput);
}

TEST(PoseTest, LogInvertsExp) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 phi = test::random_unit(rng) * std::uniform_real_distribution<double>(0, 3.1)(rng);
    EXPECT_LE((so3_log(so3_exp(phi)) - phi).norm(), 1e-9);
  }
}

TEST(TransformPluckerTest, IdentityPoseKeepsLine) {
  std::mt19937_64 rng(3);
  const PluckerLine l = random_line(rng);
  const PluckerLine out = transform_plucker(l, PoseSE3::identity());
  EXPECT_LE((out.n - l.n).norm(), 1e-15);
  EXPECT_LE((out.d - l.d).norm(), 1e-15);
}

TEST(TransformPluckerTest, RotationAboutZTurnsXLineIntoY) {
  const PluckerLine l{Vec3::Zero(), Vec3::UnitX()};
  const PoseSE3 rot(so3_exp(Vec3(0, 0, M_PI / 2)), Vec3::Zero());
  const PluckerLine out = transform_plucker(l, rot);
  EXPECT_LE((out.d - Vec3::UnitY()).norm(), 1e-12);
  EXPECT_LE(out.n.norm(), 1e-15);
}

TEST(TransformPluckerTest, MatchesTwoPointOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 p = test::random_vec3(rng, -2, 2);
    const Vec3 q = p + test::random_unit(rng);
    const PoseSE3 pose = random_pose(rng);
    const PluckerLine out = transform_plucker(line_through(p, q), pose);
    const PluckerLine expected = line_through(pose * p, pose * q);
    EXPECT_LE((out.n - expected.n).norm(), 1e-9);
    EXPECT_LE((out.d - expected.d).norm(), 1e-9);
  }
}

TEST(TransformPluckerTest, PreservesConstraintAndComposes) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const PluckerLine l = random_line(rng);
    const PoseSE3 t1 = random_pose(rng);
    const PoseSE3 t2 = random_pose(rng);
    const PluckerLine direct = transform_plucker(l, t1 * t2);
    const PluckerLine chained = transform_plucker(transform_plucker(l, t2), t1);
    EXPECT_LE(std::abs(direct.n.dot(direct.d)), 1e-9);
    EXPECT_LE((direct.n - chained.n).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((direct.d - chained.d).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ProjectLineTest, AxisAlignedPlaneGivesImageXAxis) {
  CameraModel unit;
  unit.fx = unit.fy = 1.0;
  unit.cx = unit.cy = 0.0;
  // Line along x through (0, 0, 1): plane normal is (0, 1, 0) up to scale.
  const PluckerLine l = line_through(Vec3(0, 0, 1), Vec3(1, 0, 1));
  const Vec3 c = project_line(l, unit).coeffs;
  const Vec3 expected = c.y() > 0 ? Vec3(0, 1, 0) : Vec3(0, -1, 0);
  EXPECT_LE((c - expected).norm(), 1e-12);
}

TEST(ProjectLineTest, LineThroughCenterIsDegenerate) {
  const PluckerLine l{Vec3::Zero(), Vec3(0, 0, 1)};
  EXPECT_THROW(project_line(l, CameraModel{}), DegenerateProjection);
}

TEST(ProjectLineTest, ProjectedPointsLieOnImageLine) {
  std::mt19937_64 rng(6);
  const CameraModel cam;
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 p = test::random_vec3(rng, -1, 1) + Vec3(0, 0, 4);
    const Vec3 q = test::random_vec3(rng, -1, 1) + Vec3(0, 0, 4);
    const Vec3 c = project_line(line_through(p, q), cam).coeffs;
    EXPECT_NEAR(c.head<2>().norm(), 1.0, 1e-12);
    for (const Vec3& x : {p, q, Vec3(0.3 * p + 0.7 * q)}) {
      EXPECT_LE(std::abs(c.dot(cam.project(x).homogeneous())), 1e-8);
    }
  }
}

TEST(LineResidualTest, EndpointsOnLineGiveZero) {
  const Line2D l{Vec3(1, -1, 2).normalized()};
  const LineSegment2D seg(Vec2(0, 2), Vec2(3, 5));
  EXPECT_LE(line_reprojection_residual(l, seg).norm(), 1e-12);
}

TEST(LineResidualTest, DistancesToXAxis) {
  const Vec2 r = line_reprojection_residual(Line2D{Vec3(0, 1, 0)},
                                            LineSegment2D(Vec2(5, 3), Vec2(9, -2)));
  EXPECT_DOUBLE_EQ(r.x(), 3.0);
  EXPECT_DOUBLE_EQ(r.y(), -2.0);
}

TEST(LineResidualTest, MatchesTwoPointDistanceAndIgnoresSign) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 a(u(rng), u(rng));
    const Vec2 b(u(rng), u(rng));
    const Vec3 coeffs = a.homogeneous().cross(b.homogeneous()) * 0.37;
    const LineSegment2D seg(Vec2(u(rng), u(rng)), Vec2(u(rng), u(rng)));
    const Vec2 r = line_reprojection_residual(Line2D{coeffs}, seg);
    const Vec2 flipped = line_reprojection_residual(Line2D{-coeffs}, seg);
    const double sign = r.x() * signed_distance(seg.start(), a, b) >= 0 ? 1.0 : -1.0;
    EXPECT_NEAR(r.x(), sign * signed_distance(seg.start(), a, b), 1e-9);
    EXPECT_NEAR(r.y(), sign * signed_distance(seg.end(), a, b), 1e-9);
    EXPECT_LE((r + flipped).norm(), 1e-12);
  }
}

TEST(LineResidualTest, DegenerateLineThrows) {
  EXPECT_THROW(line_reprojection_residual(Line2D{Vec3(0, 0, 1)}, LineSegment2D(Vec2(0, 0), Vec2(1, 1))),
               DegenerateLine);
}

TEST(SegmentTest, CachesLength) {
  const LineSegment2D seg(Vec2(0, 0), Vec2(3, 4), 7);
  EXPECT_DOUBLE_EQ(seg.length(), 5.0);
  EXPECT_EQ(seg.track_id(), 7);
}

TEST(TriangulateLineTest, RecoversRenderedLine) {
  std::mt19937_64 rng(8);
  const CameraModel cam;
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 p = test::random_vec3(rng, -1, 1) + Vec3(0, 0, 4);
    Vec3 q = test::random_vec3(rng, -1, 1) + Vec3(0, 0, 4);
    if (std::abs((q - p).normalized().x()) > 0.9) continue;  // nearly epipolar
    const PoseSE3 left = PoseSE3::identity();
    const LineSegment2D seg_l(project(cam, left, Eye::Left, p), project(cam, left, Eye::Left, q));
    const LineSegment2D seg_r(project(cam, left, Eye::Right, p), project(cam, left, Eye::Right, q));
    const PluckerLine truth = line_through(p, q);
    const PluckerLine est = triangulate_line_stereo(seg_l, seg_r, cam);
    const double angle = std::acos(std::min(1.0, std::abs(est.d.dot(truth.d))));
    EXPECT_LE(angle, 1e-7);
    for (Eye eye : {Eye::Left, Eye::Right}) {
      const LineSegment2D& seg = eye == Eye::Left ? seg_l : seg_r;
      const Vec2 r = line_residual_jacobians(left, est, cam, eye, seg).residual;
      EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(TriangulateLineTest, ZeroDisparityIsParallel) {
  const LineSegment2D seg(Vec2(100, 100), Vec2(120, 300));
  EXPECT_THROW(triangulate_line_stereo(seg, seg, CameraModel{}), ParallelPlanes);
}

TEST(TriangulateLineTest, LineAlongBaselineIsParallel) {
  const CameraModel cam;
  const Vec3 p(-0.5, 0.2, 3.0);
  const Vec3 q(0.5, 0.2, 3.0);
  const LineSegment2D seg_l(cam.project(p), cam.project(q));
  const LineSegment2D seg_r(cam.project(p - Vec3(cam.baseline, 0, 0)),
                            cam.project(q - Vec3(cam.baseline, 0, 0)));
  EXPECT_THROW(triangulate_line_stereo(seg_l, seg_r, cam), ParallelPlanes);
}

TEST(TriangulateLineTest, VerticalLineMomentEqualsDepth) {
  const CameraModel cam;
  const double depth = 2.5;
  const Vec3 p(0, -0.4, depth);
  const Vec3 q(0, 0.4, depth);
  const LineSegment2D seg_l(cam.project(p), cam.project(q));
  const LineSegment2D seg_r(cam.project(p - Vec3(cam.baseline, 0, 0)),
                            cam.project(q - Vec3(cam.baseline, 0, 0)));
  const PluckerLine est = triangulate_line_stereo(seg_l, seg_r, cam);
  EXPECT_NEAR(est.n.norm(), depth, 1e-9);
}

TEST(TriangulatePointTest, DepthFromDisparity) {
  CameraModel cam;
  cam.fx = cam.fy = 100.0;
  cam.baseline = 0.1;
  const auto p = triangulate_point_stereo(Vec2(200, 100), Vec2(190, 100), cam);
  ASSERT_TRUE(p.has_value());
  EXPECT_NEAR(p->z(), 1.0, 1e-12);
  EXPECT_FALSE(triangulate_point_stereo(Vec2(200, 100), Vec2(200, 100), cam).has_value());
  EXPECT_FALSE(triangulate_point_stereo(Vec2(200, 100), Vec2(205, 100), cam).has_value());
  // 0.01 px disparity puts the point at 1000 m, beyond the default bound.
  EXPECT_FALSE(triangulate_point_stereo(Vec2(200, 100), Vec2(199.99, 100), cam).has_value());
}

TEST(OrthonormalLineTest, RoundTripIsIdentity) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    const PluckerLine l = random_line(rng);
    const PluckerLine back = OrthonormalLine::from_plucker(l).to_plucker();
    EXPECT_LE((back.n - l.n).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((back.d - l.d).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(OrthonormalLineTest, RetractJacobianMatchesDifferences) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const PluckerLine l = random_line(rng);
    const Vec3 anchor = test::random_vec3(rng, -1, 1);
    const auto j = line_retract_jacobian(l, anchor);
    Eigen::Matrix<double, 6, 4> numeric;
    const double h = 1e-6;
    for (int k = 0; k < 4; ++k) {
      Vec4 e = Vec4::Zero();
      e[k] = h;
      const PluckerLine a = line_retract(l, e, anchor);
      const PluckerLine b = line_retract(l, -e, anchor);
      numeric.col(k) << (a.n - b.n) / (2 * h), (a.d - b.d) / (2 * h);
    }
    EXPECT_LE(max_relative_error(j, numeric), 1e-6);
  }
}

TEST(ResidualJacobianTest, PointFactorsMatchCentralDifferences) {
  std::mt19937_64 rng(11);
  const CameraModel cam;
  for (int trial = 0; trial < 200; ++trial) {
    const PoseSE3 pose = test::pose_facing_origin(rng);
    const Vec3 point = test::random_vec3(rng, -1, 1);
    const Eye eye = trial % 2 ? Eye::Left : Eye::Right;
    const Vec2 observed = project(cam, pose, eye, point) + Vec2(1.5, -0.7);
    const PointResidual r = point_residual_jacobians(pose, point, cam, eye, observed);
    Eigen::Matrix<double, 2, 9> analytic;
    analytic << r.d_pose, r.d_point;
    const auto numeric = test::numeric_point_jacobian(pose, point, cam, eye, observed, 1e-6);
    EXPECT_LE(max_relative_error(analytic, numeric), 1e-5);
  }
}

TEST(ResidualJacobianTest, LineFactorsMatchCentralDifferences) {
  std::mt19937_64 rng(12);
  const CameraModel cam;
  for (int trial = 0; trial < 200; ++trial) {
    const PoseSE3 pose = test::pose_facing_origin(rng);
    const Vec3 p = test::random_vec3(rng, -1, 1);
    const Vec3 q = test::random_vec3(rng, -1, 1);
    const Eye eye = trial % 2 ? Eye::Left : Eye::Right;
    const LineSegment2D observed(project(cam, pose, eye, p) + Vec2(0.8, -1.1),
                                 project(cam, pose, eye, q) + Vec2(-0.4, 0.9));
    const Vec3 anchor = pose.inverse().translation();
    const PluckerLine line = line_through(p, q);
    const LineResidual r = line_residual_jacobians(pose, line, cam, eye, observed, anchor);
    Eigen::Matrix<double, 2, 10> analytic;
    analytic << r.d_pose, r.d_line;
    const auto numeric = test::numeric_line_jacobian(pose, line, cam, eye, observed, anchor, 1e-6);
    EXPECT_LE(max_relative_error(analytic, numeric), 1e-5);
  }
}

TEST(ResidualJacobianTest, ZeroResidualKeepsFullRankJacobian) {
  std::mt19937_64 rng(13);
  const CameraModel cam;
  const PoseSE3 pose = test::pose_facing_origin(rng);
  const Vec3 p(0.3, -0.2, 0.1);
  const Vec3 q(-0.4, 0.5, 0.2);
  const LineSegment2D observed(project(cam, pose, Eye::Left, p), project(cam, pose, Eye::Left, q));
  const LineResidual r = line_residual_jacobians(pose, line_through(p, q), cam, Eye::Left, observed);
  EXPECT_LE(r.residual.cwiseAbs().maxCoeff(), 1e-9);
  using PoseJacobian = Eigen::Matrix<double, 2, 6>;
  using LineJacobian = Eigen::Matrix<double, 2, 4>;
  EXPECT_EQ(Eigen::FullPivLU<PoseJacobian>(r.d_pose).rank(), 2);
  EXPECT_EQ(Eigen::FullPivLU<LineJacobian>(r.d_line).rank(), 2);
}

TEST(ResidualJacobianTest, TaylorRemainderIsSecondOrder) {
  std::mt19937_64 rng(14);
  const CameraModel cam;
  const PoseSE3 pose = test::pose_facing_origin(rng);
  const Vec3 point(0.2, 0.1, -0.3);
  const Vec2 observed = project(cam, pose, Eye::Left, point);
  const PointResidual base = point_residual_jacobians(pose, point, cam, Eye::Left, observed);
  for (int k = 0; k < 6; ++k) {
    auto remainder = [&](double h) {
      Vec6 e = Vec6::Zero();
      e[k] = h;
      const Vec2 moved = point_residual_jacobians(pose.retract(e), point, cam, Eye::Left, observed).residual;
      return (moved - base.residual - base.d_pose * e).norm();
    };
    const double r1 = remainder(1e-3);
    const double r2 = remainder(5e-4);
    // Halving the step quarters a second-order remainder. Lateral shifts move
    // the projection linearly, leaving only roundoff.
    EXPECT_LE(r2, 0.26 * r1 + 1e-10) << "tangent axis " << k;
    EXPECT_LE(r1, 1e-2) << "tangent axis " << k;
  }
}

}  // namespace
}  // namespace otpl
