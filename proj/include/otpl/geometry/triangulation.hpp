#pragma once

#include <optional>

#include "otpl/geometry/camera.hpp"
#include "otpl/geometry/line.hpp"

namespace otpl {

inline constexpr double kDefaultMaxDepth = 50.0;

/// Intersects the planes back-projected from a rectified stereo segment pair.
/// The result is expressed in the left camera frame with |d| = 1.
/// Throws ParallelPlanes when the planes are parallel within 1e-9 and
/// InvalidInput for segments shorter than 1 px.
PluckerLine triangulate_line_stereo(const LineSegment2D& left, const LineSegment2D& right,
                                    const CameraModel& cam);

/// Sine of the angle between the two back-projected planes; small values mean
/// the segment runs along the epipolar direction.
double stereo_plane_angle_sine(const LineSegment2D& left, const LineSegment2D& right,
                               const CameraModel& cam);

/// Left-camera point from a rectified stereo pixel pair. Returns nullopt when
/// the disparity is not positive, the depth exceeds max_depth, or a pixel is
/// outside the image.
std::optional<Vec3> triangulate_point_stereo(const Vec2& left, const Vec2& right,
                                             const CameraModel& cam,
                                             double max_depth = kDefaultMaxDepth);

/// Point of `line` (camera frame) hit by the viewing ray through `pixel`.
/// Returns nullopt if the ray and line are parallel.
std::optional<Vec3> intersect_ray_with_line(const Vec2& pixel, const PluckerLine& line_cam,
                                            const CameraModel& cam);

}  // namespace otpl
