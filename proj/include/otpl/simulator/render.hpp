#pragma once

#include <optional>
#include <vector>

#include "otpl/descriptor/feature_map.hpp"
#include "otpl/geometry/camera.hpp"
#include "otpl/geometry/line.hpp"
#include "otpl/simulator/scene.hpp"

namespace otpl {

struct IlluminationEvent {
  int frame = 0;  // applies from this frame on, until the next event
  double gain = 1.0;
  double bias = 0.0;
};

struct NoiseSpec {
  double pixel_sigma = 0.0;  // px, keypoints and line endpoints
  double detection_dropout = 0.0;
  std::optional<double> line_dropout;  // overrides detection_dropout for lines
  std::vector<IlluminationEvent> illumination_events;
  double descriptor_noise_sigma = 0.0;  // per-frame perturbation of landmark signatures
  double short_line_sigma = 0.0;        // px, replaces pixel_sigma on short segments
  double short_line_length_px = 30.0;

  void validate() const;
  double line_dropout_probability() const { return line_dropout.value_or(detection_dropout); }
};

struct FeatureSpec {
  int depth = 16;
  double scale = 0.125;  // feature px per image px
  double background_sigma = 0.05;
  double falloff_radius = 4.0;  // feature px
  double min_segment_px = 8.0;
  double near_plane = 0.1;  // m

  void validate() const;
};

struct Keypoint {
  Id id = 0;
  Vec2 pixel = Vec2::Zero();
};

struct EyeObservation {
  std::vector<Keypoint> keypoints;    // id order
  std::vector<LineSegment2D> lines;   // id order, track_id holds the landmark id
  FeatureMap line_map;
  FeatureMap point_map;
};

struct FrameObservation {
  int frame = 0;
  double timestamp = 0.0;
  EyeObservation left;
  EyeObservation right;

  const EyeObservation& eye(Eye e) const { return e == Eye::Left ? left : right; }
};

/// Noise-free projections of every landmark visible in one eye.
struct VisibleGeometry {
  std::vector<Keypoint> keypoints;
  std::vector<LineSegment2D> lines;
};

VisibleGeometry project_visible(const Scene& scene, const PoseSE3& pose_cw, Eye eye,
                                const CameraModel& cam, const FeatureSpec& features);

/// Clips a segment to [0, W-1] x [0, H-1]; nullopt when nothing remains.
std::optional<std::pair<Vec2, Vec2>> clip_to_image(const Vec2& a, const Vec2& b,
                                                   const CameraModel& cam);

/// Unit-norm pseudo-random channel signature of a landmark.
VecX landmark_signature(std::uint64_t seed, bool is_line, Id id, int depth);

struct FeatureMaps {
  FeatureMap line_map;
  FeatureMap point_map;
};

/// Splats landmark signatures with Gaussian falloff over background noise,
/// then applies the active illumination event. Values are rounded to float.
FeatureMaps synth_feature_maps(const Scene& scene, int frame, Eye eye,
                               const VisibleGeometry& geometry, const CameraModel& cam,
                               const NoiseSpec& noise, const FeatureSpec& features);

/// Projects, clips, perturbs and drops detections for both eyes of one frame.
FrameObservation render_frame(const Scene& scene, int frame, const CameraModel& cam,
                              const NoiseSpec& noise, const FeatureSpec& features);

}  // namespace otpl
