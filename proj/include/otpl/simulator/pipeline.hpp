#pragma once

#include <string>
#include <vector>

#include "otpl/association/sinkhorn.hpp"
#include "otpl/descriptor/line_descriptor.hpp"
#include "otpl/evaluation/metrics.hpp"
#include "otpl/geometry/triangulation.hpp"
#include "otpl/optimizer/levenberg_marquardt.hpp"
#include "otpl/simulator/render.hpp"
#include "otpl/weighting/line_weights.hpp"

namespace otpl {

enum class MatcherKind { OptimalTransport, NearestNeighbor };
enum class WeightingKind { Adaptive, Uniform };

std::string to_string(MatcherKind kind);
std::string to_string(WeightingKind kind);
/// "ot" / "nn"; throws InvalidInput otherwise.
MatcherKind matcher_kind_from_string(const std::string& name);
/// "adaptive" / "uniform"; throws InvalidInput otherwise.
WeightingKind weighting_kind_from_string(const std::string& name);

struct PipelineConfig {
  CameraModel camera;
  FeatureSpec features;
  DescriptorConfig descriptor;
  OTConfig ot;
  WeightConfig weight;
  SolverConfig solver;
  MatcherKind matcher = MatcherKind::OptimalTransport;
  WeightingKind weighting = WeightingKind::Adaptive;
  int keyframe_interval = 1;  // every k-th frame is a keyframe
  int window_size = 10;
  double point_sigma_px = 1.0;
  double min_plane_sine = 1e-3;  // rejects stereo line pairs along the epipolar direction
  double min_line_parallax_px = 3.0;  // stereo offset measured across the segment
  double max_depth = kDefaultMaxDepth;

  void validate() const;
};

/// Association quality of one matching stage in one keyframe.
struct MatchLog {
  int frame = 0;
  std::string stage;  // "temporal" or "stereo"
  PrecisionRecall quality;
};

struct WeightLog {
  int frame = 0;
  Id track = 0;
  double length_px = 0.0;
  int n_obs = 0;
  double weight = 0.0;
};

struct StageFailures {
  int degenerate_descriptors = 0;
  int rejected_triangulations = 0;
  int tracking_failures = 0;
  int solver_failures = 0;
  int skipped_factors = 0;
};

/// Wall-clock milliseconds summed over keyframes. Not deterministic.
struct StageTimings {
  double render_ms = 0.0;
  double describe_ms = 0.0;
  double associate_ms = 0.0;
  double tracking_ms = 0.0;
  double mapping_ms = 0.0;  // triangulation, window update and weighting
  double optimize_ms = 0.0;

  double total_ms() const {
    return render_ms + describe_ms + associate_ms + tracking_ms + mapping_ms + optimize_ms;
  }
};

struct PipelineResult {
  Trajectory estimate;
  Trajectory ground_truth;
  std::vector<MatchLog> matches;
  std::vector<WeightLog> weights;
  StageFailures failures;
  StageTimings timings;
  int windows = 0;
  int converged_windows = 0;
};

/// Renders every keyframe, associates lines against the previous keyframe,
/// tracks the pose against the current map, triangulates new landmarks,
/// weights line factors and runs windowed bundle adjustment. Stereo and
/// temporal point correspondences come from the simulator's ground-truth ids.
/// The first keyframe pose is taken from ground truth.
PipelineResult run_pipeline(const Scene& scene, const NoiseSpec& noise,
                            const PipelineConfig& cfg);

/// Aggregate precision and recall over all logs of one stage.
PrecisionRecall pooled_quality(const std::vector<MatchLog>& logs, const std::string& stage);

}  // namespace otpl
