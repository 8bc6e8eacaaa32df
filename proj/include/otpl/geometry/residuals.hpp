#pragma once

#include "otpl/geometry/camera.hpp"
#include "otpl/geometry/line.hpp"
#include "otpl/geometry/pose.hpp"

namespace otpl {

/// Projected minus observed pixel, with Jacobians w.r.t. the pose tangent
/// ([rho; phi], see PoseSE3::retract) and the world point.
struct PointResidual {
  Vec2 residual;
  Eigen::Matrix<double, 2, 6> d_pose;
  Eigen::Matrix<double, 2, 3> d_point;
};

/// Endpoint-to-line distances with Jacobians w.r.t. the pose tangent and the
/// 4-dof line tangent (see line_retract).
struct LineResidual {
  Vec2 residual;
  Eigen::Matrix<double, 2, 6> d_pose;
  Eigen::Matrix<double, 2, 4> d_line;
};

/// Throws DegenerateProjection when the point is not in front of the camera.
PointResidual point_residual_jacobians(const PoseSE3& pose_cw, const Vec3& point_w,
                                       const CameraModel& cam, Eye eye, const Vec2& observed);

/// Propagates DegenerateProjection / DegenerateLine. `anchor` selects the
/// tangent chart of the line (see line_retract).
LineResidual line_residual_jacobians(const PoseSE3& pose_cw, const PluckerLine& line_w,
                                     const CameraModel& cam, Eye eye,
                                     const LineSegment2D& observed,
                                     const Vec3& anchor = Vec3::Zero());

}  // namespace otpl
