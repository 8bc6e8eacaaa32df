#pragma once

#include <Eigen/Geometry>

#include "otpl/common/types.hpp"

namespace otpl {

Mat3 skew(const Vec3& v);

/// Rodrigues exponential of a rotation vector.
Mat3 so3_exp(const Vec3& phi);

/// Inverse of so3_exp; angle in [0, pi].
Vec3 so3_log(const Mat3& rotation);

bool is_rotation(const Mat3& m, double tol = 1e-9);

/// Rigid transform x' = R x + t.
///
/// Throughout the library camera poses are stored as T_cw (world to camera).
/// The tangent vector used by retract() is ordered [rho; phi] with the update
/// R <- Exp(phi) R, t <- t + rho.
class PoseSE3 {
 public:
  PoseSE3();

  /// Throws InvalidInput if `rotation` is not orthonormal with det +1 to 1e-9.
  PoseSE3(const Mat3& rotation, const Vec3& translation);

  static PoseSE3 identity() { return {}; }
  static PoseSE3 from_quaternion(const Eigen::Quaterniond& q, const Vec3& t);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Eigen::Quaterniond quaternion() const;

  PoseSE3 inverse() const;
  PoseSE3 operator*(const PoseSE3& rhs) const;
  Vec3 operator*(const Vec3& p) const { return rotation_ * p + translation_; }

  PoseSE3 retract(const Vec6& delta) const;

 private:
  struct Unchecked {};
  PoseSE3(Unchecked, const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  Mat3 rotation_;
  Vec3 translation_;
};

/// Rotation angle of a^-1 b in radians.
double rotation_distance(const PoseSE3& a, const PoseSE3& b);

}  // namespace otpl
