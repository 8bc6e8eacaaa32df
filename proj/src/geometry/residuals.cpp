#include "otpl/geometry/residuals.hpp"

#include <cmath>

#include "otpl/common/errors.hpp"

namespace otpl {

PointResidual point_residual_jacobians(const PoseSE3& pose_cw, const Vec3& point_w,
                                       const CameraModel& cam, Eye eye, const Vec2& observed) {
  const PoseSE3 pose = eye_pose(pose_cw, eye, cam);
  const Vec3 rotated = pose.rotation() * point_w;
  const Vec3 p = rotated + pose.translation();
  if (!(p.z() > 1e-6)) throw DegenerateProjection("point is not in front of the camera");

  const double inv_z = 1.0 / p.z();
  Eigen::Matrix<double, 2, 3> d_proj;
  d_proj << cam.fx * inv_z, 0.0, -cam.fx * p.x() * inv_z * inv_z,
            0.0, cam.fy * inv_z, -cam.fy * p.y() * inv_z * inv_z;

  PointResidual out;
  out.residual = cam.project(p) - observed;
  out.d_pose.leftCols<3>() = d_proj;
  out.d_pose.rightCols<3>() = -d_proj * skew(rotated);
  out.d_point = d_proj * pose.rotation();
  return out;
}

LineResidual line_residual_jacobians(const PoseSE3& pose_cw, const PluckerLine& line_w,
                                     const CameraModel& cam, Eye eye,
                                     const LineSegment2D& observed, const Vec3& anchor) {
  const PoseSE3 pose = eye_pose(pose_cw, eye, cam);
  const PluckerLine line = line_w.normalized();
  const Mat3& rot = pose.rotation();
  const Vec3& trans = pose.translation();
  const Vec3 rn = rot * line.n;
  const Vec3 rd = rot * line.d;
  const Vec3 n_cam = rn + trans.cross(rd);
  if (n_cam.norm() < 1e-12) throw DegenerateProjection("line passes through the camera center");

  const Mat3 k_inv_t = cam.intrinsics_inverse().transpose();
  const Vec3 l = k_inv_t * n_cam;
  const double planar_sq = l.x() * l.x() + l.y() * l.y();
  if (planar_sq < 1e-24) throw DegenerateLine("image line has l1^2 + l2^2 ~ 0");
  const double inv_planar = 1.0 / std::sqrt(planar_sq);

  const Vec3 ps(observed.start().x(), observed.start().y(), 1.0);
  const Vec3 pe(observed.end().x(), observed.end().y(), 1.0);

  LineResidual out;
  out.residual << ps.dot(l) * inv_planar, pe.dot(l) * inv_planar;

  // d r / d l for the unnormalized homogeneous line
  const Vec3 planar_part(l.x(), l.y(), 0.0);
  const double inv_cubed = inv_planar * inv_planar * inv_planar;
  Eigen::Matrix<double, 2, 3> d_l;
  d_l.row(0) = ps.transpose() * inv_planar - ps.dot(l) * inv_cubed * planar_part.transpose();
  d_l.row(1) = pe.transpose() * inv_planar - pe.dot(l) * inv_cubed * planar_part.transpose();
  const Eigen::Matrix<double, 2, 3> d_ncam = d_l * k_inv_t;

  Eigen::Matrix<double, 3, 6> dn_pose;
  dn_pose.leftCols<3>() = -skew(rd);
  dn_pose.rightCols<3>() = -skew(rn) - skew(trans) * skew(rd);
  out.d_pose = d_ncam * dn_pose;

  Eigen::Matrix<double, 3, 6> dn_plucker;
  dn_plucker.leftCols<3>() = rot;
  dn_plucker.rightCols<3>() = skew(trans) * rot;
  out.d_line = d_ncam * dn_plucker * line_retract_jacobian(line, anchor);
  return out;
}

}  // namespace otpl
