#pragma once

#include <optional>

#include "otpl/common/types.hpp"
#include "otpl/geometry/camera.hpp"
#include "otpl/geometry/pose.hpp"

namespace otpl {

/// 3D line as (n, d) with n = X x d for any point X on the line.
struct PluckerLine {
  Vec3 n = Vec3::Zero();
  Vec3 d = Vec3::UnitX();

  static PluckerLine from_points(const Vec3& p1, const Vec3& p2);

  /// Rescaled to |d| = 1 with n projected onto the plane orthogonal to d.
  PluckerLine normalized() const;

  /// |<n, d>| of the normalized line.
  double constraint_violation() const;

  /// Point of the line closest to the origin.
  Vec3 closest_point() const;
};

/// Minimal 4-dof representation: U in SO(3), (w1, w2) on the unit circle.
struct OrthonormalLine {
  Mat3 u = Mat3::Identity();
  double w1 = 0.0;
  double w2 = 1.0;

  static OrthonormalLine from_plucker(const PluckerLine& line);
  /// Returns the line with |d| = 1.
  PluckerLine to_plucker() const;
};

/// Moves a line along its 4-dof tangent: U <- U Exp(delta[0:3]),
/// W <- W Rot(delta[3]), with (U, W) taken in coordinates centered on
/// `anchor` and the direction scaled to the line's distance from it.
/// Result is normalized.
PluckerLine line_retract(const PluckerLine& line, const Vec4& delta,
                         const Vec3& anchor = Vec3::Zero());

/// d(n, d)/d(delta) of line_retract at delta = 0.
Eigen::Matrix<double, 6, 4> line_retract_jacobian(const PluckerLine& line,
                                                  const Vec3& anchor = Vec3::Zero());

PluckerLine transform_plucker(const PluckerLine& line_w, const PoseSE3& pose_cw);

/// Homogeneous image line l1 u + l2 v + l3 = 0.
struct Line2D {
  Vec3 coeffs = Vec3::UnitZ();
};

/// l proportional to K^-T n_c, normalized to l1^2 + l2^2 = 1.
/// Throws DegenerateProjection if |n_c| < 1e-12.
Line2D project_line(const PluckerLine& line_cam, const CameraModel& cam);

/// Detected image segment. The length is cached at construction.
class LineSegment2D {
 public:
  LineSegment2D() = default;
  LineSegment2D(const Vec2& start, const Vec2& end, std::optional<Id> track_id = std::nullopt);

  const Vec2& start() const { return start_; }
  const Vec2& end() const { return end_; }
  double length() const { return length_; }
  const std::optional<Id>& track_id() const { return track_id_; }
  void set_track_id(std::optional<Id> id) { track_id_ = id; }

 private:
  Vec2 start_ = Vec2::Zero();
  Vec2 end_ = Vec2::Zero();
  double length_ = 0.0;
  std::optional<Id> track_id_;
};

/// Signed endpoint-to-line distances in pixels.
/// Throws DegenerateLine if l1^2 + l2^2 < 1e-24.
Vec2 line_reprojection_residual(const Line2D& line, const LineSegment2D& segment);

}  // namespace otpl
