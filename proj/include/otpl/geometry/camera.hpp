#pragma once

#include "otpl/common/types.hpp"
#include "otpl/geometry/pose.hpp"

namespace otpl {

enum class Eye { Left, Right };

/// Rectified pinhole stereo pair. The right camera sits at +baseline along the
/// left camera's x axis with identical orientation and intrinsics.
struct CameraModel {
  double fx = 458.0;
  double fy = 458.0;
  double cx = 367.0;
  double cy = 248.0;
  double baseline = 0.11;  // meters
  int width = 752;
  int height = 480;

  void validate() const;

  Mat3 intrinsics() const;
  Mat3 intrinsics_inverse() const;

  /// Pixel of a camera-frame point. Caller guarantees z > 0.
  Vec2 project(const Vec3& p_cam) const;

  /// Ray through a pixel with unit z.
  Vec3 back_project(const Vec2& pixel) const;

  /// [0, width) x [0, height)
  bool in_image(const Vec2& pixel) const;
};

/// T_{eye,w} for a left-camera pose T_cw.
PoseSE3 eye_pose(const PoseSE3& pose_cw, Eye eye, const CameraModel& cam);

}  // namespace otpl
