#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otpl/common/types.hpp"
#include "otpl/geometry/pose.hpp"

namespace otpl {

enum class TrajectoryKind { Circle, Lissajous, Corridor };

std::string to_string(TrajectoryKind kind);
/// Accepts "circle", "lissajous", "corridor"; throws InvalidInput otherwise.
TrajectoryKind trajectory_kind_from_string(const std::string& name);

struct SceneSpec {
  std::uint64_t seed = 1;
  int n_points = 400;
  int n_lines = 80;
  double extent = 5.0;           // m, half-width of the landmark box
  double texture_density = 1.0;  // fraction of n_points actually placed
  TrajectoryKind trajectory = TrajectoryKind::Circle;
  int n_frames = 100;
  double frame_rate = 20.0;          // Hz
  double short_line_fraction = 0.0;  // share of lines generated 0.08-0.2 m long

  void validate() const;
  int effective_points() const;
};

struct PointLandmark {
  Id id = 0;
  Vec3 position = Vec3::Zero();
};

struct LineLandmark {
  Id id = 0;
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::Zero();
  bool is_short = false;
};

struct Scene {
  SceneSpec spec;
  std::vector<PointLandmark> points;  // ids 0..n-1
  std::vector<LineLandmark> lines;    // ids 0..n-1
  std::vector<double> timestamps;     // s
  std::vector<PoseSE3> poses_cw;      // ground-truth left-camera poses
};

/// Deterministic for a given spec. Camera frames follow the x right, y down,
/// z forward convention; world y points down as well.
Scene generate_scene(const SceneSpec& spec);

/// Left-camera pose looking from `position` toward `target`.
PoseSE3 look_at(const Vec3& position, const Vec3& target);

}  // namespace otpl
