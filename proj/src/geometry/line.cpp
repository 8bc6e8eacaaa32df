#include "otpl/geometry/line.hpp"

#include <cmath>

#include "otpl/common/errors.hpp"

namespace otpl {

namespace {

Vec3 any_orthogonal(const Vec3& v) {
  const Vec3 axis = std::abs(v.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return v.cross(axis).normalized();
}

}  // namespace

PluckerLine PluckerLine::from_points(const Vec3& p1, const Vec3& p2) {
  const Vec3 d = p2 - p1;
  return PluckerLine{p1.cross(d), d}.normalized();
}

PluckerLine PluckerLine::normalized() const {
  const double dn = d.norm();
  if (!(dn > 0.0)) throw DegenerateLine("Plucker line with zero direction");
  const Vec3 du = d / dn;
  Vec3 nu = n / dn;
  nu -= du * du.dot(nu);
  return {nu, du};
}

double PluckerLine::constraint_violation() const {
  const PluckerLine l{n / d.norm(), d / d.norm()};
  return std::abs(l.n.dot(l.d));
}

Vec3 PluckerLine::closest_point() const { return d.cross(n) / d.squaredNorm(); }

OrthonormalLine OrthonormalLine::from_plucker(const PluckerLine& line) {
  const PluckerLine l = line.normalized();
  const double moment = l.n.norm();
  const Vec3 u1 = moment > 1e-15 ? Vec3(l.n / moment) : any_orthogonal(l.d);
  const Vec3 u2 = l.d;
  OrthonormalLine out;
  out.u.col(0) = u1;
  out.u.col(1) = u2;
  out.u.col(2) = u1.cross(u2);
  const double scale = std::hypot(moment, 1.0);
  out.w1 = moment / scale;
  out.w2 = 1.0 / scale;
  return out;
}

PluckerLine OrthonormalLine::to_plucker() const {
  if (std::abs(w2) < 1e-12) throw DegenerateLine("orthonormal line at infinity");
  return {u.col(0) * (w1 / w2), u.col(1)};
}

namespace {

// The chart is centered on a copy of the line whose direction is scaled by the
// line's distance from the origin, so that w1 = w2 there. With a unit
// direction, distant lines sit close to w2 = 0 where small rotations of W move
// them to infinity.
double chart_scale(const PluckerLine& line) {
  const double distance = line.n.norm() / line.d.norm();
  return distance > 1e-9 ? distance : 1.0;
}

// Same line with the origin moved to `anchor`.
PluckerLine relative_to(const PluckerLine& line, const Vec3& anchor) {
  return {line.n - anchor.cross(line.d), line.d};
}

}  // namespace

PluckerLine line_retract(const PluckerLine& line_w, const Vec4& delta, const Vec3& anchor) {
  const PluckerLine line = relative_to(line_w, anchor);
  const double scale = chart_scale(line);
  OrthonormalLine o = OrthonormalLine::from_plucker({line.n, scale * line.d});
  o.u = o.u * so3_exp(delta.head<3>());
  const double c = std::cos(delta[3]);
  const double s = std::sin(delta[3]);
  const double w1 = o.w1 * c - o.w2 * s;
  const double w2 = o.w2 * c + o.w1 * s;
  o.w1 = w1;
  o.w2 = w2;
  const PluckerLine scaled = o.to_plucker();
  return relative_to(PluckerLine{scale * scaled.n, scaled.d}.normalized(), -anchor);
}

Eigen::Matrix<double, 6, 4> line_retract_jacobian(const PluckerLine& line_w, const Vec3& anchor) {
  const PluckerLine line = relative_to(line_w, anchor);
  const double scale = chart_scale(line);
  const OrthonormalLine o = OrthonormalLine::from_plucker({line.n, scale * line.d});
  const Vec3 u1 = o.u.col(0);
  const Vec3 u2 = o.u.col(1);
  const Vec3 u3 = o.u.col(2);
  Eigen::Matrix<double, 6, 4> j;
  j.block<3, 1>(0, 0).setZero();
  j.block<3, 1>(0, 1) = -o.w1 * u3;
  j.block<3, 1>(0, 2) = o.w1 * u2;
  j.block<3, 1>(0, 3) = -o.w2 * u1;
  j.block<3, 1>(3, 0) = o.w2 * u3;
  j.block<3, 1>(3, 1).setZero();
  j.block<3, 1>(3, 2) = -o.w2 * u1;
  j.block<3, 1>(3, 3) = o.w1 * u2;
  // Divide out w2 = |d| and remove the induced change of scale.
  Eigen::Matrix<double, 6, 1> plucker;
  plucker << u1 * (o.w1 / o.w2), u2;
  j /= o.w2;
  j.col(3) -= plucker * (o.w1 / o.w2);
  j.topRows<3>() *= scale;
  j.topRows<3>() += skew(anchor) * j.bottomRows<3>();
  return j;
}

PluckerLine transform_plucker(const PluckerLine& line_w, const PoseSE3& pose_cw) {
  const Vec3 rd = pose_cw.rotation() * line_w.d;
  return {pose_cw.rotation() * line_w.n + pose_cw.translation().cross(rd), rd};
}

Line2D project_line(const PluckerLine& line_cam, const CameraModel& cam) {
  if (line_cam.n.norm() < 1e-12) {
    throw DegenerateProjection("line passes through the camera center");
  }
  const Vec3 l = cam.intrinsics_inverse().transpose() * line_cam.n;
  const double planar = l.head<2>().norm();
  if (!(planar > 1e-12 * l.norm())) {
    throw DegenerateProjection("line projects to the line at infinity");
  }
  return {l / planar};
}

LineSegment2D::LineSegment2D(const Vec2& start, const Vec2& end, std::optional<Id> track_id)
    : start_(start), end_(end), length_((end - start).norm()), track_id_(track_id) {}

Vec2 line_reprojection_residual(const Line2D& line, const LineSegment2D& segment) {
  const Vec3& l = line.coeffs;
  const double planar_sq = l.x() * l.x() + l.y() * l.y();
  if (planar_sq < 1e-24) throw DegenerateLine("image line has l1^2 + l2^2 ~ 0");
  const double inv = 1.0 / std::sqrt(planar_sq);
  const Vec3 ps(segment.start().x(), segment.start().y(), 1.0);
  const Vec3 pe(segment.end().x(), segment.end().y(), 1.0);
  return {ps.dot(l) * inv, pe.dot(l) * inv};
}

}  // namespace otpl
