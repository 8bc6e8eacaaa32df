#include "otpl/simulator/render.hpp"

#include <algorithm>
#include <cmath>

#include "otpl/common/errors.hpp"
#include "otpl/simulator/rng.hpp"

namespace otpl {

namespace {

enum Stream : std::uint64_t {
  kPointNoise = 1,
  kLineNoise = 2,
  kBackground = 3,
  kSignatureNoise = 4,
  kSignature = 5,
};

std::uint64_t eye_label(Eye eye) { return eye == Eye::Left ? 0 : 1; }

Vec2 clamp_to_image(const Vec2& p, const CameraModel& cam) {
  return {std::clamp(p.x(), 0.0, cam.width - 1.0), std::clamp(p.y(), 0.0, cam.height - 1.0)};
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + s * ab - p).norm();
}

// Adds sig * exp(-d^2 / (2 s^2)) for every cell within `radius` of segment ab
// (feature coordinates), with s = radius / 2.
void splat(FeatureMap& map, const VecX& sig, const Vec2& a, const Vec2& b, double radius) {
  const double s2 = 2.0 * (0.5 * radius) * (0.5 * radius);
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - radius)));
  const int x1 = std::min(map.width() - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - radius)));
  const int y1 = std::min(map.height() - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + radius)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = point_segment_distance(Vec2(x, y), a, b);
      if (d > radius) continue;
      const double g = std::exp(-d * d / s2);
      for (int c = 0; c < map.depth(); ++c) map.at(c, y, x) += g * sig[c];
    }
  }
}

VecX perturbed(const VecX& sig, double sigma, Rng& rng) {
  VecX out = sig;
  for (Eigen::Index c = 0; c < out.size(); ++c) out[c] += sigma * rng.normal();
  const double n = out.norm();
  return n > 0.0 ? VecX(out / n) : sig;
}

const IlluminationEvent* active_event(const NoiseSpec& noise, int frame) {
  const IlluminationEvent* best = nullptr;
  for (const IlluminationEvent& e : noise.illumination_events) {
    if (e.frame <= frame && (best == nullptr || e.frame >= best->frame)) best = &e;
  }
  return best;
}

}  // namespace

void NoiseSpec::validate() const {
  if (!(pixel_sigma >= 0.0)) throw InvalidInput("noise: pixel_sigma must be >= 0");
  if (!(detection_dropout >= 0.0 && detection_dropout <= 1.0)) {
    throw InvalidInput("noise: detection_dropout must lie in [0, 1]");
  }
  if (line_dropout && !(*line_dropout >= 0.0 && *line_dropout <= 1.0)) {
    throw InvalidInput("noise: line_dropout must lie in [0, 1]");
  }
  for (const IlluminationEvent& e : illumination_events) {
    if (!(e.gain > 0.0)) throw InvalidInput("noise: illumination gain must be positive");
    if (e.frame < 0) throw InvalidInput("noise: illumination frame must be >= 0");
  }
  if (!(descriptor_noise_sigma >= 0.0) || !(short_line_sigma >= 0.0) ||
      !(short_line_length_px >= 0.0)) {
    throw InvalidInput("noise: sigmas and lengths must be >= 0");
  }
}

void FeatureSpec::validate() const {
  if (depth < 4) throw InvalidInput("features: depth must be >= 4");
  if (!(scale > 0.0 && scale <= 1.0)) throw InvalidInput("features: scale must lie in (0, 1]");
  if (!(background_sigma >= 0.0) || !(falloff_radius > 0.0) || !(min_segment_px >= 1.0) ||
      !(near_plane > 0.0)) {
    throw InvalidInput("features: invalid falloff, segment length or near plane");
  }
}

std::optional<std::pair<Vec2, Vec2>> clip_to_image(const Vec2& a, const Vec2& b,
                                                   const CameraModel& cam) {
  // Liang-Barsky
  const Vec2 d = b - a;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-d.x(), d.x(), -d.y(), d.y()};
  const double q[4] = {a.x(), cam.width - 1.0 - a.x(), a.y(), cam.height - 1.0 - a.y()};
  for (int k = 0; k < 4; ++k) {
    if (p[k] == 0.0) {
      if (q[k] < 0.0) return std::nullopt;
      continue;
    }
    const double r = q[k] / p[k];
    if (p[k] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
  }
  if (t0 > t1) return std::nullopt;
  return std::make_pair(clamp_to_image(a + t0 * d, cam), clamp_to_image(a + t1 * d, cam));
}

VisibleGeometry project_visible(const Scene& scene, const PoseSE3& pose_cw, Eye eye,
                                const CameraModel& cam, const FeatureSpec& features) {
  const PoseSE3 t = eye_pose(pose_cw, eye, cam);
  VisibleGeometry out;
  for (const PointLandmark& p : scene.points) {
    const Vec3 pc = t * p.position;
    if (pc.z() <= features.near_plane) continue;
    const Vec2 px = cam.project(pc);
    if (px.x() >= 0.0 && px.y() >= 0.0 && px.x() <= cam.width - 1.0 && px.y() <= cam.height - 1.0) {
      out.keypoints.push_back({p.id, px});
    }
  }
  for (const LineLandmark& l : scene.lines) {
    Vec3 a = t * l.start;
    Vec3 b = t * l.end;
    const double near = features.near_plane;
    if (a.z() <= near && b.z() <= near) continue;
    if (a.z() <= near) a = a + (near - a.z()) / (b.z() - a.z()) * (b - a);
    if (b.z() <= near) b = b + (near - b.z()) / (a.z() - b.z()) * (a - b);
    const auto clipped = clip_to_image(cam.project(a), cam.project(b), cam);
    if (!clipped) continue;
    if ((clipped->second - clipped->first).norm() < features.min_segment_px) continue;
    out.lines.emplace_back(clipped->first, clipped->second, l.id);
  }
  return out;
}

VecX landmark_signature(std::uint64_t seed, bool is_line, Id id, int depth) {
  Rng rng(derive_seed(seed, kSignature, is_line ? 1 : 0, static_cast<std::uint64_t>(id)));
  VecX sig(depth);
  for (int c = 0; c < depth; ++c) sig[c] = rng.normal();
  return sig / sig.norm();
}

FeatureMaps synth_feature_maps(const Scene& scene, int frame, Eye eye,
                               const VisibleGeometry& geometry, const CameraModel& cam,
                               const NoiseSpec& noise, const FeatureSpec& features) {
  features.validate();
  const int w = static_cast<int>(std::ceil(cam.width * features.scale));
  const int h = static_cast<int>(std::ceil(cam.height * features.scale));
  FeatureMaps maps{FeatureMap(features.depth, h, w, features.scale),
                   FeatureMap(features.depth, h, w, features.scale)};
  const std::uint64_t seed = scene.spec.seed;
  const auto f = static_cast<std::uint64_t>(frame);

  // Uniform background with standard deviation background_sigma.
  Rng bg(derive_seed(seed, kBackground, f, eye_label(eye)));
  const double half_width = std::sqrt(3.0) * features.background_sigma;
  for (FeatureMap* m : {&maps.line_map, &maps.point_map}) {
    for (double& v : m->data()) v = bg.uniform(-half_width, half_width);
  }

  Rng jitter(derive_seed(seed, kSignatureNoise, f, eye_label(eye)));
  auto signature = [&](bool is_line, Id id) {
    const VecX sig = landmark_signature(seed, is_line, id, features.depth);
    if (noise.descriptor_noise_sigma <= 0.0) return sig;
    return perturbed(sig, noise.descriptor_noise_sigma, jitter);
  };
  for (const LineSegment2D& s : geometry.lines) {
    splat(maps.line_map, signature(true, *s.track_id()), features.scale * s.start(),
          features.scale * s.end(), features.falloff_radius);
  }
  for (const Keypoint& k : geometry.keypoints) {
    const Vec2 p = features.scale * k.pixel;
    splat(maps.point_map, signature(false, k.id), p, p, features.falloff_radius);
  }

  const IlluminationEvent* event = active_event(noise, frame);
  for (FeatureMap* m : {&maps.line_map, &maps.point_map}) {
    if (event != nullptr) m->apply_gain_bias(event->gain, event->bias);
    for (double& v : m->data()) v = static_cast<double>(static_cast<float>(v));
  }
  return maps;
}

FrameObservation render_frame(const Scene& scene, int frame, const CameraModel& cam,
                              const NoiseSpec& noise, const FeatureSpec& features) {
  if (frame < 0 || frame >= static_cast<int>(scene.poses_cw.size())) {
    throw InvalidInput("render_frame: frame index out of range");
  }
  noise.validate();
  features.validate();
  FrameObservation obs;
  obs.frame = frame;
  obs.timestamp = scene.timestamps[frame];
  const auto f = static_cast<std::uint64_t>(frame);
  const double line_dropout = noise.line_dropout_probability();

  for (Eye eye : {Eye::Left, Eye::Right}) {
    EyeObservation& out = eye == Eye::Left ? obs.left : obs.right;
    const VisibleGeometry geometry =
        project_visible(scene, scene.poses_cw[frame], eye, cam, features);

    Rng point_rng(derive_seed(scene.spec.seed, kPointNoise, f, eye_label(eye)));
    for (const Keypoint& k : geometry.keypoints) {
      const bool dropped = point_rng.bernoulli(noise.detection_dropout);
      const Vec2 n(point_rng.normal(), point_rng.normal());
      if (dropped) continue;
      out.keypoints.push_back({k.id, clamp_to_image(k.pixel + noise.pixel_sigma * n, cam)});
    }

    Rng line_rng(derive_seed(scene.spec.seed, kLineNoise, f, eye_label(eye)));
    for (const LineSegment2D& s : geometry.lines) {
      const bool dropped = line_rng.bernoulli(line_dropout);
      const Vec2 ns(line_rng.normal(), line_rng.normal());
      const Vec2 ne(line_rng.normal(), line_rng.normal());
      if (dropped) continue;
      const bool is_short = noise.short_line_sigma > 0.0 && s.length() < noise.short_line_length_px;
      const double sigma = is_short ? noise.short_line_sigma : noise.pixel_sigma;
      const Vec2 a = clamp_to_image(s.start() + sigma * ns, cam);
      const Vec2 b = clamp_to_image(s.end() + sigma * ne, cam);
      if ((b - a).norm() < 1.0) continue;
      out.lines.emplace_back(a, b, s.track_id());
    }

    FeatureMaps maps = synth_feature_maps(scene, frame, eye, geometry, cam, noise, features);
    out.line_map = std::move(maps.line_map);
    out.point_map = std::move(maps.point_map);
  }
  return obs;
}

}  // namespace otpl
