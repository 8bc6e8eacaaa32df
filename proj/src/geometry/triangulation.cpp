#include "otpl/geometry/triangulation.hpp"

#include <cmath>

#include "otpl/common/errors.hpp"

namespace otpl {

namespace {

// Normal of the plane through the camera center and both segment endpoints,
// expressed in that camera's frame.
Vec3 back_projected_normal(const LineSegment2D& seg, const CameraModel& cam) {
  if (seg.length() < 1.0) throw InvalidInput("stereo triangulation needs segments of >= 1 px");
  return cam.back_project(seg.start()).cross(cam.back_project(seg.end()));
}

}  // namespace

double stereo_plane_angle_sine(const LineSegment2D& left, const LineSegment2D& right,
                               const CameraModel& cam) {
  const Vec3 nl = back_projected_normal(left, cam).normalized();
  const Vec3 nr = back_projected_normal(right, cam).normalized();
  return nl.cross(nr).norm();
}

PluckerLine triangulate_line_stereo(const LineSegment2D& left, const LineSegment2D& right,
                                    const CameraModel& cam) {
  const Vec3 nl = back_projected_normal(left, cam);
  const Vec3 nr = back_projected_normal(right, cam);
  const Vec3 d = nl.cross(nr);
  if (d.norm() <= 1e-9 * nl.norm() * nr.norm()) {
    throw ParallelPlanes("back-projected stereo planes are parallel");
  }
  // Left plane: nl.X = 0. Right plane: nr.(X - c_r) = 0 with c_r = (b, 0, 0).
  const Vec3 n = cam.baseline * nr.x() * nl;
  return PluckerLine{n, d}.normalized();
}

std::optional<Vec3> triangulate_point_stereo(const Vec2& left, const Vec2& right,
                                             const CameraModel& cam, double max_depth) {
  if (!cam.in_image(left) || !cam.in_image(right)) return std::nullopt;
  const double disparity = left.x() - right.x();
  if (!(disparity > 0.0)) return std::nullopt;
  const double z = cam.fx * cam.baseline / disparity;
  if (!(z > 0.0) || z > max_depth) return std::nullopt;
  return Vec3((left.x() - cam.cx) * z / cam.fx, (left.y() - cam.cy) * z / cam.fy, z);
}

std::optional<Vec3> intersect_ray_with_line(const Vec2& pixel, const PluckerLine& line_cam,
                                            const CameraModel& cam) {
  const PluckerLine l = line_cam.normalized();
  const Vec3 ray = cam.back_project(pixel);
  const Vec3 x0 = l.closest_point();
  // Closest points of s*ray and x0 + t*d.
  const double a = ray.dot(ray);
  const double b = ray.dot(l.d);
  const double c = l.d.dot(l.d);
  const double denom = a * c - b * b;
  if (denom < 1e-12 * a * c) return std::nullopt;
  const Vec3 w = -x0;
  const double dw_ray = ray.dot(w);
  const double dw_line = l.d.dot(w);
  const double t = (a * dw_line - b * dw_ray) / denom;
  return x0 + t * l.d;
}

}  // namespace otpl
