#include "otpl/geometry/pose.hpp"

#include <algorithm>
#include <cmath>

#include "otpl/common/errors.hpp"

namespace otpl {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 so3_exp(const Vec3& phi) {
  const double theta = phi.norm();
  if (theta < 1e-12) {
    return Mat3::Identity() + skew(phi);
  }
  return Eigen::AngleAxisd(theta, phi / theta).toRotationMatrix();
}

Vec3 so3_log(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

bool is_rotation(const Mat3& m, double tol) {
  const Mat3 gram = m.transpose() * m;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(m.determinant() - 1.0) <= tol;
}

PoseSE3::PoseSE3() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

PoseSE3::PoseSE3(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!is_rotation(rotation_)) {
    throw InvalidInput("PoseSE3: rotation is not orthonormal with det +1");
  }
  if (!translation_.allFinite()) {
    throw InvalidInput("PoseSE3: non-finite translation");
  }
}

PoseSE3 PoseSE3::from_quaternion(const Eigen::Quaterniond& q, const Vec3& t) {
  return {Unchecked{}, q.normalized().toRotationMatrix(), t};
}

Eigen::Quaterniond PoseSE3::quaternion() const {
  Eigen::Quaterniond q(rotation_);
  q.normalize();
  return q;
}

PoseSE3 PoseSE3::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return {Unchecked{}, rt, -(rt * translation_)};
}

namespace {

// Products of rotations drift off SO(3) by roundoff; chained compositions
// amplify that drift unless it is projected away.
Mat3 orthonormalized(const Mat3& m) {
  return Eigen::Quaterniond(m).normalized().toRotationMatrix();
}

}  // namespace

PoseSE3 PoseSE3::operator*(const PoseSE3& rhs) const {
  return {Unchecked{}, orthonormalized(rotation_ * rhs.rotation_),
          rotation_ * rhs.translation_ + translation_};
}

PoseSE3 PoseSE3::retract(const Vec6& delta) const {
  const Vec3 rho = delta.head<3>();
  const Vec3 phi = delta.tail<3>();
  return {Unchecked{}, orthonormalized(so3_exp(phi) * rotation_), translation_ + rho};
}

double rotation_distance(const PoseSE3& a, const PoseSE3& b) {
  const Mat3 rel = a.rotation().transpose() * b.rotation();
  const double c = std::clamp((rel.trace() - 1.0) * 0.5, -1.0, 1.0);
  // acos loses precision near zero; the log is accurate there
  if (c > 0.99) return so3_log(rel).norm();
  return std::acos(c);
}

}  // namespace otpl
