#include "otpl/simulator/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "otpl/common/errors.hpp"
#include "otpl/simulator/rng.hpp"

namespace otpl {

namespace {

constexpr double kClearance = 0.5;  // m kept free around the camera path
constexpr double kCorridorWidth = 1.5;
constexpr double kCorridorHeight = 1.2;
constexpr double kCorridorSpeed = 1.0;  // m/s
constexpr int kMaxRejections = 1000;

struct TrajectorySample {
  Vec3 position;
  Vec3 target;
};

TrajectorySample sample_trajectory(const SceneSpec& spec, double t) {
  using std::numbers::pi;
  switch (spec.trajectory) {
    case TrajectoryKind::Circle: {
      const double radius = 0.3 * spec.extent;
      const double a = 0.5 * t;
      return {{radius * std::sin(a), 0.1 * std::sin(2.0 * pi * 0.2 * t), -radius * std::cos(a)},
              Vec3::Zero()};
    }
    case TrajectoryKind::Lissajous: {
      const double s = 0.25 * spec.extent;
      const Vec3 p(s * std::sin(0.6 * t), 0.3 * s * std::sin(1.2 * t + 0.5),
                   -0.3 * spec.extent + 0.5 * s * std::sin(0.9 * t));
      const Vec3 target(0.3 * s * std::sin(0.4 * t), 0.0, spec.extent);
      return {p, target};
    }
    case TrajectoryKind::Corridor: {
      const double z = kCorridorSpeed * t;
      const Vec3 p(0.15 * std::sin(0.8 * t), 0.05 * std::sin(1.7 * t), z);
      const Vec3 target(0.3 * std::sin(0.5 * t), 0.0, z + 4.0);
      return {p, target};
    }
  }
  throw InvalidInput("unknown trajectory kind");
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + s * ab - p).norm();
}

struct Box {
  Vec3 lo;
  Vec3 hi;
};

Box corridor_box(const SceneSpec& spec) {
  const double travel = kCorridorSpeed * (spec.n_frames - 1) / spec.frame_rate;
  return {{-0.5 * kCorridorWidth, -0.5 * kCorridorHeight, -spec.extent},
          {0.5 * kCorridorWidth, 0.5 * kCorridorHeight, travel + 2.0 * spec.extent}};
}

Vec3 random_in_box(Rng& rng, const Box& box) {
  return {rng.uniform(box.lo.x(), box.hi.x()), rng.uniform(box.lo.y(), box.hi.y()),
          rng.uniform(box.lo.z(), box.hi.z())};
}

// Points live on the corridor walls, floor and ceiling.
Vec3 random_on_corridor(Rng& rng, const Box& box) {
  Vec3 p = random_in_box(rng, box);
  const auto face = rng.index(4);
  if (face == 0) p.x() = box.lo.x();
  if (face == 1) p.x() = box.hi.x();
  if (face == 2) p.y() = box.lo.y();
  if (face == 3) p.y() = box.hi.y();
  return p;
}

LineLandmark random_line(Rng& rng, const SceneSpec& spec, bool is_short) {
  using std::numbers::pi;
  const double length = is_short ? rng.uniform(0.08, 0.2) : rng.uniform(0.3, 0.8) * spec.extent;
  if (spec.trajectory == TrajectoryKind::Corridor) {
    const Box box = corridor_box(spec);
    const auto face = rng.index(4);
    const bool wall = face < 2;
    Vec3 dir;
    if (wall) {
      // Directions in the wall plane (y, z).
      const double a = rng.uniform(0.0, pi);
      dir = Vec3(0.0, std::cos(a), std::sin(a));
    } else {
      // Floor and ceiling: avoid directions close to the stereo baseline.
      const double a = rng.uniform(-0.3 * pi, 0.3 * pi);
      dir = Vec3(std::sin(a), 0.0, std::cos(a));
    }
    const double len = wall ? std::min(length, 0.9 * kCorridorHeight) : length;
    Vec3 c = random_in_box(rng, box);
    if (face == 0) c.x() = box.lo.x();
    if (face == 1) c.x() = box.hi.x();
    if (face == 2) c.y() = box.lo.y();
    if (face == 3) c.y() = box.hi.y();
    Vec3 a = c - 0.5 * len * dir;
    Vec3 b = c + 0.5 * len * dir;
    for (Vec3* p : {&a, &b}) {
      p->x() = std::clamp(p->x(), box.lo.x(), box.hi.x());
      p->y() = std::clamp(p->y(), box.lo.y(), box.hi.y());
    }
    return {0, a, b, is_short};
  }
  const auto axis = static_cast<int>(rng.index(3));
  const double e = spec.extent;
  Vec3 c(rng.uniform(-e, e), rng.uniform(-e, e), rng.uniform(-e, e));
  const double a = rng.uniform(0.0, pi);
  Vec3 dir = Vec3::Zero();
  dir[(axis + 1) % 3] = std::cos(a);
  dir[(axis + 2) % 3] = std::sin(a);
  return {0, c - 0.5 * length * dir, c + 0.5 * length * dir, is_short};
}

}  // namespace

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::Circle:
      return "circle";
    case TrajectoryKind::Lissajous:
      return "lissajous";
    case TrajectoryKind::Corridor:
      return "corridor";
  }
  return "unknown";
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  if (name == "circle") return TrajectoryKind::Circle;
  if (name == "lissajous") return TrajectoryKind::Lissajous;
  if (name == "corridor") return TrajectoryKind::Corridor;
  throw InvalidInput("unknown trajectory '" + name + "'");
}

void SceneSpec::validate() const {
  if (n_points < 0 || n_lines < 0) throw InvalidInput("scene: landmark counts must be >= 0");
  if (!(extent > 0.0)) throw InvalidInput("scene: extent must be positive");
  if (!(texture_density >= 0.0 && texture_density <= 1.0)) {
    throw InvalidInput("scene: texture_density must lie in [0, 1]");
  }
  if (n_frames < 2) throw InvalidInput("scene: n_frames must be >= 2");
  if (!(frame_rate > 0.0)) throw InvalidInput("scene: frame_rate must be positive");
  if (!(short_line_fraction >= 0.0 && short_line_fraction <= 1.0)) {
    throw InvalidInput("scene: short_line_fraction must lie in [0, 1]");
  }
}

int SceneSpec::effective_points() const {
  return static_cast<int>(std::lround(n_points * texture_density));
}

PoseSE3 look_at(const Vec3& position, const Vec3& target) {
  const Vec3 z = (target - position).normalized();
  Vec3 x = Vec3::UnitY().cross(z);
  if (x.norm() < 1e-9) x = Vec3::UnitX();
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r_wc;
  r_wc << x, y, z;
  return PoseSE3(r_wc.transpose(), -r_wc.transpose() * position);
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Scene scene;
  scene.spec = spec;

  std::vector<Vec3> path;
  for (int k = 0; k < spec.n_frames; ++k) {
    const double t = k / spec.frame_rate;
    const TrajectorySample s = sample_trajectory(spec, t);
    scene.timestamps.push_back(t);
    scene.poses_cw.push_back(look_at(s.position, s.target));
    path.push_back(s.position);
  }
  auto clear_of_path = [&](const Vec3& a, const Vec3& b) {
    return std::all_of(path.begin(), path.end(), [&](const Vec3& p) {
      return point_segment_distance(p, a, b) >= kClearance;
    });
  };

  Rng rng(derive_seed(spec.seed, 0x5ce7e));
  const bool corridor = spec.trajectory == TrajectoryKind::Corridor;
  const Box box = corridor ? corridor_box(spec)
                           : Box{Vec3::Constant(-spec.extent), Vec3::Constant(spec.extent)};
  const int n_points = spec.effective_points();
  for (int i = 0; i < n_points; ++i) {
    Vec3 p;
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
      p = corridor ? random_on_corridor(rng, box) : random_in_box(rng, box);
      if (clear_of_path(p, p)) break;
    }
    scene.points.push_back({i, p});
  }

  const int n_short = static_cast<int>(std::lround(spec.n_lines * spec.short_line_fraction));
  for (int i = 0; i < spec.n_lines; ++i) {
    const bool is_short = i < n_short;
    LineLandmark l;
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
      l = random_line(rng, spec, is_short);
      if (clear_of_path(l.start, l.end)) break;
    }
    l.id = i;
    scene.lines.push_back(l);
  }
  return scene;
}

}  // namespace otpl
