#include "otpl/geometry/camera.hpp"

#include "otpl/common/errors.hpp"

namespace otpl {

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidInput("camera: focal lengths must be positive");
  if (!(baseline > 0.0)) throw InvalidInput("camera: baseline must be positive");
  if (width <= 0 || height <= 0) throw InvalidInput("camera: image size must be positive");
}

Mat3 CameraModel::intrinsics() const {
  Mat3 k;
  k << fx, 0.0, cx,
       0.0, fy, cy,
       0.0, 0.0, 1.0;
  return k;
}

Mat3 CameraModel::intrinsics_inverse() const {
  Mat3 k;
  k << 1.0 / fx, 0.0, -cx / fx,
       0.0, 1.0 / fy, -cy / fy,
       0.0, 0.0, 1.0;
  return k;
}

Vec2 CameraModel::project(const Vec3& p_cam) const {
  return {fx * p_cam.x() / p_cam.z() + cx, fy * p_cam.y() / p_cam.z() + cy};
}

Vec3 CameraModel::back_project(const Vec2& pixel) const {
  return {(pixel.x() - cx) / fx, (pixel.y() - cy) / fy, 1.0};
}

bool CameraModel::in_image(const Vec2& pixel) const {
  return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() < width && pixel.y() < height;
}

PoseSE3 eye_pose(const PoseSE3& pose_cw, Eye eye, const CameraModel& cam) {
  if (eye == Eye::Left) return pose_cw;
  const PoseSE3 right_from_left(Mat3::Identity(), Vec3(-cam.baseline, 0.0, 0.0));
  return right_from_left * pose_cw;
}

}  // namespace otpl
