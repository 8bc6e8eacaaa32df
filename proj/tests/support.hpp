#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "otpl/geometry/camera.hpp"
#include "otpl/geometry/line.hpp"
#include "otpl/geometry/pose.hpp"
#include "otpl/geometry/residuals.hpp"

namespace otpl::test {

inline Vec3 random_vec3(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline PoseSE3 random_pose(std::mt19937_64& rng, double max_angle = 3.0, double max_shift = 2.0) {
  std::uniform_real_distribution<double> angle(0.0, max_angle);
  return PoseSE3(so3_exp(random_unit(rng) * angle(rng)), random_vec3(rng, -max_shift, max_shift));
}

inline PluckerLine random_line(std::mt19937_64& rng) {
  const Vec3 p = random_vec3(rng, -2.0, 2.0);
  return PluckerLine::from_points(p, p + random_unit(rng));
}

/// A pose looking at the origin from a random direction, 3 to 5 m away.
inline PoseSE3 pose_facing_origin(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(3.0, 5.0);
  Vec3 dir = random_unit(rng);
  const Vec3 center = dir * dist(rng);
  const Vec3 z = -center.normalized();
  Vec3 x = Vec3::UnitY().cross(z);
  if (x.norm() < 1e-3) x = Vec3::UnitX().cross(z);
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r_wc;
  r_wc << x, y, z;
  return PoseSE3(r_wc, center).inverse();
}

/// Largest |a - b| relative to max(|b|, floor), elementwise.
template <typename A, typename B>
double max_relative_error(const A& analytic, const B& numeric, double floor = 1.0) {
  double worst = 0.0;
  for (int r = 0; r < analytic.rows(); ++r) {
    for (int c = 0; c < analytic.cols(); ++c) {
      const double scale = std::max(std::abs(numeric(r, c)), floor);
      worst = std::max(worst, std::abs(analytic(r, c) - numeric(r, c)) / scale);
    }
  }
  return worst;
}

/// Central differences of a point factor residual w.r.t. pose and point tangents.
inline Eigen::Matrix<double, 2, 9> numeric_point_jacobian(const PoseSE3& pose, const Vec3& point,
                                                          const CameraModel& cam, Eye eye,
                                                          const Vec2& observed, double h) {
  Eigen::Matrix<double, 2, 9> j;
  for (int k = 0; k < 6; ++k) {
    Vec6 e = Vec6::Zero();
    e[k] = h;
    j.col(k) = (point_residual_jacobians(pose.retract(e), point, cam, eye, observed).residual -
                point_residual_jacobians(pose.retract(-e), point, cam, eye, observed).residual) /
               (2 * h);
  }
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e[k] = h;
    j.col(6 + k) = (point_residual_jacobians(pose, point + e, cam, eye, observed).residual -
                    point_residual_jacobians(pose, point - e, cam, eye, observed).residual) /
                   (2 * h);
  }
  return j;
}

/// Central differences of a line factor residual w.r.t. pose and line tangents.
inline Eigen::Matrix<double, 2, 10> numeric_line_jacobian(const PoseSE3& pose,
                                                          const PluckerLine& line,
                                                          const CameraModel& cam, Eye eye,
                                                          const LineSegment2D& observed,
                                                          const Vec3& anchor, double h) {
  Eigen::Matrix<double, 2, 10> j;
  auto res = [&](const PoseSE3& p, const PluckerLine& l) {
    return line_residual_jacobians(p, l, cam, eye, observed, anchor).residual;
  };
  for (int k = 0; k < 6; ++k) {
    Vec6 e = Vec6::Zero();
    e[k] = h;
    j.col(k) = (res(pose.retract(e), line) - res(pose.retract(-e), line)) / (2 * h);
  }
  for (int k = 0; k < 4; ++k) {
    Vec4 e = Vec4::Zero();
    e[k] = h;
    j.col(6 + k) =
        (res(pose, line_retract(line, e, anchor)) - res(pose, line_retract(line, -e, anchor))) /
        (2 * h);
  }
  return j;
}

}  // namespace otpl::test
