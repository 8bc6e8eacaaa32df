#include "otpl/io/commands.hpp"

#include <cstdio>

#include "otpl/association/matcher.hpp"
#include "otpl/common/errors.hpp"
#include "otpl/io/formats.hpp"
#include "otpl/optimizer/levenberg_marquardt.hpp"

namespace otpl {

namespace {

namespace fs = std::filesystem;

std::string eye_prefix(Eye eye) { return eye == Eye::Left ? "left" : "right"; }

fs::path fmap_dir_for(const fs::path& frame_dir, Eye eye) {
  if (fs::exists(frame_dir / (eye_prefix(eye) + "_line.fmap"))) return frame_dir;
  const fs::path normalized = fs::weakly_canonical(frame_dir);
  return normalized.parent_path().parent_path() / "fmaps" / normalized.filename();
}

struct Described {
  std::vector<LineSegment2D> segments;
  std::vector<LineDescriptor> descriptors;
};

Described describe_eye(const EyeObservation& eye, const DescriptorConfig& cfg) {
  std::vector<Vec2> keypoints;
  for (const Keypoint& k : eye.keypoints) keypoints.push_back(k.pixel);
  Described out;
  for (const LineSegment2D& s : eye.lines) {
    try {
      out.descriptors.push_back(build_descriptor(eye.line_map, eye.point_map, s, keypoints, cfg));
      out.segments.push_back(s);
    } catch (const DegenerateDescriptor&) {
    }
  }
  return out;
}

std::string scene_text(const Scene& scene) {
  std::string out;
  for (const PointLandmark& p : scene.points) {
    out += "P " + std::to_string(p.id) + " " + format_double(p.position.x()) + " " +
           format_double(p.position.y()) + " " + format_double(p.position.z()) + "\n";
  }
  for (const LineLandmark& l : scene.lines) {
    out += "L " + std::to_string(l.id) + " " + format_double(l.start.x()) + " " +
           format_double(l.start.y()) + " " + format_double(l.start.z()) + " " +
           format_double(l.end.x()) + " " + format_double(l.end.y()) + " " +
           format_double(l.end.z()) + "\n";
  }
  return out;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string frame_dir_name(int frame) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", frame);
  return buf;
}

void simulate_to_directory(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  const Scene scene = generate_scene(cfg.scene);
  Trajectory gt;
  for (int f = 0; f < cfg.scene.n_frames; ++f) {
    const FrameObservation obs =
        render_frame(scene, f, cfg.pipeline.camera, cfg.noise, cfg.pipeline.features);
    const fs::path frame_dir = out / "frames" / frame_dir_name(f);
    const fs::path fmap_dir = out / "fmaps" / frame_dir_name(f);
    for (Eye eye : {Eye::Left, Eye::Right}) {
      const EyeObservation& e = obs.eye(eye);
      const std::string p = eye_prefix(eye);
      write_text_file(frame_dir / (p + "_lines.txt"), format_segments(e.lines));
      write_text_file(frame_dir / (p + "_keypoints.txt"), format_keypoints(e.keypoints));
      write_feature_map(fmap_dir / (p + "_line.fmap"), e.line_map);
      write_feature_map(fmap_dir / (p + "_point.fmap"), e.point_map);
    }
    gt.push_back(scene.timestamps[f], scene.poses_cw[f].inverse());
  }
  write_text_file(out / "scene.txt", scene_text(scene));
  write_text_file(out / "gt_trajectory.txt", format_tum(gt));
  write_text_file(out / "config.txt", to_config_text(cfg));
}

EyeObservation load_eye(const fs::path& frame_dir, Eye eye) {
  const std::string p = eye_prefix(eye);
  EyeObservation out;
  out.lines = parse_segments(read_text_file(frame_dir / (p + "_lines.txt")));
  out.keypoints = parse_keypoints(read_text_file(frame_dir / (p + "_keypoints.txt")));
  const fs::path maps = fmap_dir_for(frame_dir, eye);
  out.line_map = read_feature_map(maps / (p + "_line.fmap"));
  out.point_map = read_feature_map(maps / (p + "_point.fmap"));
  return out;
}

std::string describe_frame(const fs::path& frame_dir, Eye eye, const RunConfig& cfg) {
  const Described d = describe_eye(load_eye(frame_dir, eye), cfg.pipeline.descriptor);
  return format_descriptors(d.segments, d.descriptors);
}

std::string match_frames(const fs::path& frame_a, const fs::path& frame_b, Eye eye,
                         const RunConfig& cfg) {
  const Described a = describe_eye(load_eye(frame_a, eye), cfg.pipeline.descriptor);
  const Described b = describe_eye(load_eye(frame_b, eye), cfg.pipeline.descriptor);
  const MatchSet ms = cfg.pipeline.matcher == MatcherKind::NearestNeighbor
                          ? nearest_neighbor_match(a.descriptors, b.descriptors)
                          : associate_lines(a.segments, b.segments, a.descriptors, b.descriptors,
                                            cfg.pipeline.ot);
  return format_matches(ms);
}

std::string weight_matches(const std::string& match_text, const std::string& segments_a_text,
                           const std::string* tracks_text, const RunConfig& cfg) {
  const ParsedMatches parsed = parse_matches(match_text);
  const std::vector<LineSegment2D> segments = parse_segments(segments_a_text);
  std::vector<Id> track_of_a;
  for (const LineSegment2D& s : segments) track_of_a.push_back(s.track_id().value_or(-1));

  TrackTable tracks;
  if (tracks_text != nullptr) tracks = parse_tracks(*tracks_text);
  for (const Match& m : parsed.matches.pairs) {
    if (m.i < 0 || static_cast<std::size_t>(m.i) >= segments.size()) {
      throw MissingTrack("match index " + std::to_string(m.i) + " has no segment");
    }
    const Id id = track_of_a[m.i];
    if (tracks_text == nullptr) tracks[id] = LineTrack{id, 2, {}, {}};
    auto it = tracks.find(id);
    if (it == tracks.end()) throw MissingTrack("unknown track id " + std::to_string(id));
    it->second.p_s = segments[m.i].start();
    it->second.p_e = segments[m.i].end();
  }
  const std::vector<double> w = line_weights(parsed.matches, track_of_a, tracks, cfg.pipeline.weight);
  return format_matches(parsed.matches, w);
}

std::string optimize_graph_text(std::string& graph_text, const RunConfig& cfg) {
  FactorGraph graph = parse_graph(graph_text);
  const SolverReport r = optimize(graph, cfg.pipeline.solver);
  graph_text = format_graph(graph);
  return "iterations " + std::to_string(r.iterations) + " initial_cost " +
         format_double(r.initial_cost) + " final_cost " + format_double(r.final_cost) +
         " converged " + (r.converged ? "true" : "false") + " skipped_factors " +
         std::to_string(r.skipped_factors);
}

std::string metrics_csv(const RunSummary& s, const RunConfig& cfg) {
  const PipelineResult& r = s.result;
  std::string out =
      "run_id,ate_rmse_cm,precision,recall,stereo_precision,stereo_recall,matcher,weighting,"
      "keyframes,windows,converged_windows,degenerate_descriptors,rejected_triangulations,"
      "tracking_failures,solver_failures,skipped_factors\n";
  out += s.run_id + "," + format_double(s.ate_rmse_cm) + "," + format_double(s.temporal.precision) +
         "," + format_double(s.temporal.recall) + "," + format_double(s.stereo.precision) + "," +
         format_double(s.stereo.recall) + "," + to_string(cfg.pipeline.matcher) + "," +
         to_string(cfg.pipeline.weighting) + "," + std::to_string(r.estimate.size()) + "," +
         std::to_string(r.windows) + "," + std::to_string(r.converged_windows) + "," +
         std::to_string(r.failures.degenerate_descriptors) + "," +
         std::to_string(r.failures.rejected_triangulations) + "," +
         std::to_string(r.failures.tracking_failures) + "," +
         std::to_string(r.failures.solver_failures) + "," +
         std::to_string(r.failures.skipped_factors) + "\n";
  return out;
}

RunSummary run_to_directory(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  RunSummary s;
  s.run_id = "seed" + std::to_string(cfg.scene.seed) + "_" + to_string(cfg.pipeline.matcher) + "_" +
             to_string(cfg.pipeline.weighting);
  const Scene scene = generate_scene(cfg.scene);
  s.result = run_pipeline(scene, cfg.noise, cfg.pipeline);
  s.ate_rmse_cm = ate_rmse_cm(s.result.estimate, s.result.ground_truth);
  s.temporal = pooled_quality(s.result.matches, "temporal");
  s.stereo = pooled_quality(s.result.matches, "stereo");

  const PipelineResult& r = s.result;
  write_text_file(out / "config.txt", to_config_text(cfg));
  write_text_file(out / "metrics.csv", metrics_csv(s, cfg));
  write_text_file(out / "trajectory.txt", format_tum(r.estimate));
  write_text_file(out / "gt_trajectory.txt", format_tum(r.ground_truth));

  std::string matches = "frame,stage,correct,accepted,possible,precision,recall\n";
  for (const MatchLog& m : r.matches) {
    matches += std::to_string(m.frame) + "," + m.stage + "," + std::to_string(m.quality.correct) +
               "," + std::to_string(m.quality.accepted) + "," + std::to_string(m.quality.possible) +
               "," + format_double(m.quality.precision) + "," + format_double(m.quality.recall) + "\n";
  }
  write_text_file(out / "match_log.csv", matches);

  std::string weights = "frame,track,length_px,n_obs,weight\n";
  for (const WeightLog& w : r.weights) {
    weights += std::to_string(w.frame) + "," + std::to_string(w.track) + "," +
               format_double(w.length_px) + "," + std::to_string(w.n_obs) + "," +
               format_double(w.weight) + "\n";
  }
  write_text_file(out / "weight_log.csv", weights);

  const StageTimings& t = r.timings;
  const double frames = std::max<double>(1.0, static_cast<double>(r.estimate.size()));
  std::string timings =
      "run_id,mean_runtime_ms,render_ms,describe_ms,associate_ms,tracking_ms,mapping_ms,"
      "optimize_ms\n";
  timings += s.run_id + "," + format_double(t.total_ms() / frames) + "," +
             format_double(t.render_ms) + "," + format_double(t.describe_ms) + "," +
             format_double(t.associate_ms) + "," + format_double(t.tracking_ms) + "," +
             format_double(t.mapping_ms) + "," + format_double(t.optimize_ms) + "\n";
  write_text_file(out / "timings.csv", timings);
  return s;
}

std::string evaluate_files(const fs::path& est, const fs::path& ref) {
  const Trajectory e = parse_tum(read_text_file(est));
  const Trajectory r = parse_tum(read_text_file(ref));
  return fixed2(ate_rmse_cm(e, r));
}

}  // namespace otpl
