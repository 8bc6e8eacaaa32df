#include "otpl/simulator/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>

#include "otpl/association/matcher.hpp"
#include "otpl/common/errors.hpp"
#include "otpl/geometry/triangulation.hpp"
#include "otpl/optimizer/sliding_window.hpp"

namespace otpl {

namespace {

constexpr int kMinTrackingFactors = 6;

class StageClock {
 public:
  /// Adds the time since the previous call to `bucket`.
  void charge(double& bucket) {
    const auto now = std::chrono::steady_clock::now();
    bucket += std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct DescribedEye {
  std::vector<LineSegment2D> segments;  // track_id carries the ground-truth id
  std::vector<LineDescriptor> descriptors;
  std::vector<Id> truth;
};

DescribedEye describe(const EyeObservation& eye, const DescriptorConfig& cfg, int& failures) {
  std::vector<Vec2> keypoints;
  keypoints.reserve(eye.keypoints.size());
  for (const Keypoint& k : eye.keypoints) keypoints.push_back(k.pixel);
  DescribedEye out;
  for (const LineSegment2D& s : eye.lines) {
    try {
      out.descriptors.push_back(build_descriptor(eye.line_map, eye.point_map, s, keypoints, cfg));
      out.segments.push_back(s);
      out.truth.push_back(s.track_id().value_or(-1));
    } catch (const DegenerateDescriptor&) {
      ++failures;
    }
  }
  return out;
}

MatchSet match(const DescribedEye& a, const DescribedEye& b, const PipelineConfig& cfg) {
  if (cfg.matcher == MatcherKind::NearestNeighbor) {
    return nearest_neighbor_match(a.descriptors, b.descriptors);
  }
  return associate_lines(a.segments, b.segments, a.descriptors, b.descriptors, cfg.ot);
}

PoseSE3 cam_to_world(const PoseSE3& pose_cw) { return pose_cw.inverse(); }

// Stereo line landmark in world coordinates, or nullopt when the pair fails
// the parallax and depth checks.
std::optional<PluckerLine> triangulate_line(const LineSegment2D& left, const LineSegment2D& right,
                                            const PoseSE3& pose_cw, const PipelineConfig& cfg) {
  const CameraModel& cam = cfg.camera;
  const double lo = std::max(std::min(left.start().y(), left.end().y()),
                             std::min(right.start().y(), right.end().y()));
  const double hi = std::min(std::max(left.start().y(), left.end().y()),
                             std::max(right.start().y(), right.end().y()));
  if (hi < lo) return std::nullopt;
  try {
    if (stereo_plane_angle_sine(left, right, cam) < cfg.min_plane_sine) return std::nullopt;
    // Parallax across the segment; horizontal segments have none.
    const Line2D l{Vec3(left.start().x(), left.start().y(), 1.0)
                       .cross(Vec3(left.end().x(), left.end().y(), 1.0))};
    const Vec2 offsets = line_reprojection_residual(l, right);
    if (std::abs(0.5 * (offsets[0] + offsets[1])) < cfg.min_line_parallax_px) return std::nullopt;
    const PluckerLine line_cam = triangulate_line_stereo(left, right, cam);
    for (const Vec2& p : {left.start(), left.end()}) {
      const auto x = intersect_ray_with_line(p, line_cam, cam);
      if (!x || x->z() <= cfg.features.near_plane || x->z() > cfg.max_depth) return std::nullopt;
    }
    return transform_plucker(line_cam, cam_to_world(pose_cw)).normalized();
  } catch (const Error&) {
    return std::nullopt;
  }
}

PointFactor point_factor(Id pose, Id point, Eye eye, const Vec2& px, const PipelineConfig& cfg) {
  return {pose, point, eye, px, cfg.point_sigma_px, cfg.solver.huber_delta_px / cfg.point_sigma_px};
}

LineFactor line_factor(Id pose, Id line, Eye eye, const LineSegment2D& s,
                       const PipelineConfig& cfg) {
  return {pose, line, eye, s, 1.0, cfg.solver.huber_delta_px};
}

}  // namespace

std::string to_string(MatcherKind kind) {
  return kind == MatcherKind::OptimalTransport ? "ot" : "nn";
}

std::string to_string(WeightingKind kind) {
  return kind == WeightingKind::Adaptive ? "adaptive" : "uniform";
}

MatcherKind matcher_kind_from_string(const std::string& name) {
  if (name == "ot") return MatcherKind::OptimalTransport;
  if (name == "nn") return MatcherKind::NearestNeighbor;
  throw InvalidInput("unknown matcher '" + name + "' (expected ot or nn)");
}

WeightingKind weighting_kind_from_string(const std::string& name) {
  if (name == "adaptive") return WeightingKind::Adaptive;
  if (name == "uniform") return WeightingKind::Uniform;
  throw InvalidInput("unknown weighting '" + name + "' (expected adaptive or uniform)");
}

void PipelineConfig::validate() const {
  camera.validate();
  features.validate();
  descriptor.validate();
  ot.validate();
  weight.validate();
  solver.validate();
  if (keyframe_interval < 1) throw InvalidInput("pipeline: keyframe_interval must be >= 1");
  if (window_size < 2) throw InvalidInput("pipeline: window_size must be >= 2");
  if (!(point_sigma_px > 0.0)) throw InvalidInput("pipeline: point_sigma_px must be positive");
  if (!(min_plane_sine >= 0.0) || !(min_line_parallax_px >= 0.0) || !(max_depth > 0.0)) {
    throw InvalidInput("pipeline: invalid triangulation thresholds");
  }
}

PrecisionRecall pooled_quality(const std::vector<MatchLog>& logs, const std::string& stage) {
  PrecisionRecall out;
  for (const MatchLog& log : logs) {
    if (log.stage != stage) continue;
    out.correct += log.quality.correct;
    out.accepted += log.quality.accepted;
    out.possible += log.quality.possible;
  }
  out.precision = out.accepted == 0 ? 1.0 : static_cast<double>(out.correct) / out.accepted;
  out.recall = out.possible == 0 ? 1.0 : static_cast<double>(out.correct) / out.possible;
  return out;
}

PipelineResult run_pipeline(const Scene& scene, const NoiseSpec& noise,
                            const PipelineConfig& cfg) {
  cfg.validate();
  noise.validate();
  PipelineResult result;
  FactorGraph graph;
  graph.camera = cfg.camera;

  std::map<int, PoseSE3> estimates;  // frame -> T_cw
  TrackTable tracks;
  Id next_track = 0;
  DescribedEye prev_left;
  std::vector<Id> prev_tracks;
  std::vector<int> keyframes;

  for (int f = 0; f < static_cast<int>(scene.poses_cw.size()); f += cfg.keyframe_interval) {
    StageClock clock;
    StageTimings& timing = result.timings;
    const FrameObservation obs = render_frame(scene, f, cfg.camera, noise, cfg.features);
    clock.charge(timing.render_ms);
    const DescribedEye left = describe(obs.left, cfg.descriptor, result.failures.degenerate_descriptors);
    const DescribedEye right = describe(obs.right, cfg.descriptor, result.failures.degenerate_descriptors);
    clock.charge(timing.describe_ms);

    // Temporal line association against the previous keyframe.
    std::vector<Id> cur_tracks(left.segments.size(), -1);
    if (!keyframes.empty()) {
      const MatchSet ms = match(prev_left, left, cfg);
      result.matches.push_back({f, "temporal", match_precision_recall(ms, prev_left.truth, left.truth)});
      for (const Match& m : ms.pairs) {
        cur_tracks[m.j] = prev_tracks[m.i];
        ++tracks.at(prev_tracks[m.i]).n_obs;
      }
    }
    for (std::size_t i = 0; i < cur_tracks.size(); ++i) {
      if (cur_tracks[i] < 0) {
        cur_tracks[i] = next_track++;
        tracks[cur_tracks[i]] = LineTrack{cur_tracks[i], 1, {}, {}};
      }
      LineTrack& t = tracks.at(cur_tracks[i]);
      t.p_s = left.segments[i].start();
      t.p_e = left.segments[i].end();
    }

    // Stereo line pairing.
    std::vector<int> right_of(left.segments.size(), -1);
    {
      const MatchSet ms = match(left, right, cfg);
      result.matches.push_back({f, "stereo", match_precision_recall(ms, left.truth, right.truth)});
      for (const Match& m : ms.pairs) right_of[m.i] = m.j;
    }
    clock.charge(timing.associate_ms);

    // Pose prediction and pose-only tracking against the current map.
    PoseSE3 pose = scene.poses_cw[f];
    if (!keyframes.empty()) {
      const PoseSE3& prev = estimates.at(keyframes.back());
      pose = prev;
      if (keyframes.size() >= 2) {
        const PoseSE3& prev2 = estimates.at(keyframes[keyframes.size() - 2]);
        pose = prev * prev2.inverse() * prev;
      }
      FactorGraph tracking;
      tracking.camera = cfg.camera;
      tracking.poses[keyframes.back()] = PoseVariable{prev, true};
      tracking.poses[f] = PoseVariable{pose, false};
      for (Eye eye : {Eye::Left, Eye::Right}) {
        for (const Keypoint& k : obs.eye(eye).keypoints) {
          const auto it = graph.points.find(k.id);
          if (it == graph.points.end()) continue;
          tracking.points[k.id] = PointVariable{it->second.position, true};
          tracking.point_factors.push_back(point_factor(f, k.id, eye, k.pixel, cfg));
        }
      }
      for (std::size_t i = 0; i < left.segments.size(); ++i) {
        const auto it = graph.lines.find(cur_tracks[i]);
        if (it == graph.lines.end()) continue;
        tracking.lines[it->first] = LineVariable{it->second.line, true, it->second.anchor};
        tracking.line_factors.push_back(line_factor(f, it->first, Eye::Left, left.segments[i], cfg));
        if (right_of[i] >= 0) {
          tracking.line_factors.push_back(
              line_factor(f, it->first, Eye::Right, right.segments[right_of[i]], cfg));
        }
      }
      const auto n_factors = tracking.point_factors.size() + tracking.line_factors.size();
      if (n_factors < kMinTrackingFactors) {
        ++result.failures.tracking_failures;
      } else {
        try {
          optimize(tracking, cfg.solver);
          pose = tracking.poses.at(f).pose;
        } catch (const Error&) {
          ++result.failures.tracking_failures;
        }
      }
    }

    clock.charge(timing.tracking_ms);

    // New landmarks and factors of this keyframe.
    KeyframeInsertion kf;
    kf.id = f;
    kf.pose = pose;
    std::map<Id, Vec2> right_points;
    for (const Keypoint& k : obs.right.keypoints) right_points[k.id] = k.pixel;
    for (const Keypoint& k : obs.left.keypoints) {
      if (graph.points.count(k.id) != 0) continue;
      const auto r = right_points.find(k.id);
      if (r == right_points.end()) continue;
      const auto x = triangulate_point_stereo(k.pixel, r->second, cfg.camera, cfg.max_depth);
      if (!x) {
        ++result.failures.rejected_triangulations;
        continue;
      }
      kf.new_points[k.id] = cam_to_world(pose) * *x;
    }
    for (Eye eye : {Eye::Left, Eye::Right}) {
      for (const Keypoint& k : obs.eye(eye).keypoints) {
        if (graph.points.count(k.id) == 0 && kf.new_points.count(k.id) == 0) continue;
        kf.point_factors.push_back(point_factor(f, k.id, eye, k.pixel, cfg));
      }
    }
    for (std::size_t i = 0; i < left.segments.size(); ++i) {
      const Id t = cur_tracks[i];
      const int j = right_of[i];
      if (graph.lines.count(t) == 0) {
        if (j < 0) continue;
        const auto line = triangulate_line(left.segments[i], right.segments[j], pose, cfg);
        if (!line) {
          ++result.failures.rejected_triangulations;
          continue;
        }
        kf.new_lines[t] = LineVariable{*line, false, cam_to_world(pose).translation()};
      }
      kf.line_factors.push_back(line_factor(f, t, Eye::Left, left.segments[i], cfg));
      if (j >= 0) kf.line_factors.push_back(line_factor(f, t, Eye::Right, right.segments[j], cfg));
    }
    marginal_window_update(graph, std::move(kf), static_cast<std::size_t>(cfg.window_size));

    // Reliability weights from the current track state.
    for (LineFactor& lf : graph.line_factors) {
      const int n_obs = tracks.at(lf.line_id).n_obs;
      lf.weight = cfg.weighting == WeightingKind::Adaptive
                      ? line_weight(lf.observed.length(), n_obs, cfg.weight)
                      : 1.0;
      if (lf.pose_id == f && lf.eye == Eye::Left) {
        result.weights.push_back({f, lf.line_id, lf.observed.length(), n_obs, lf.weight});
      }
    }

    clock.charge(timing.mapping_ms);

    if (graph.poses.size() >= 2) {
      ++result.windows;
      try {
        const SolverReport report = optimize(graph, cfg.solver);
        if (report.converged) ++result.converged_windows;
        result.failures.skipped_factors += report.skipped_factors;
      } catch (const Error&) {
        ++result.failures.solver_failures;
      }
    }
    clock.charge(timing.optimize_ms);
    for (const auto& [id, v] : graph.poses) estimates[static_cast<int>(id)] = v.pose;
    if (estimates.count(f) == 0) estimates[f] = pose;
    keyframes.push_back(f);
    prev_left = left;
    prev_tracks = cur_tracks;
  }

  for (int f : keyframes) {
    result.estimate.push_back(scene.timestamps[f], cam_to_world(estimates.at(f)));
    result.ground_truth.push_back(scene.timestamps[f], cam_to_world(scene.poses_cw[f]));
  }
  return result;
}

}  // namespace otpl
