#pragma once

#include <filesystem>
#include <string>

#include "otpl/io/config.hpp"

namespace otpl {

/// Frame directory name for a frame index, e.g. 000042.
std::string frame_dir_name(int frame);

/// Writes frames/NNNNNN/{left,right}_{lines,keypoints}.txt,
/// fmaps/NNNNNN/{left,right}_{line,point}.fmap, scene.txt, gt_trajectory.txt
/// and config.txt under `out`.
void simulate_to_directory(const RunConfig& cfg, const std::filesystem::path& out);

/// Reads one eye of a simulated frame. Feature maps are looked up in the
/// frame directory first and then in the sibling fmaps/ tree.
EyeObservation load_eye(const std::filesystem::path& frame_dir, Eye eye);

/// Descriptor dump for one eye of a frame.
std::string describe_frame(const std::filesystem::path& frame_dir, Eye eye, const RunConfig& cfg);

/// Associates the lines of two frames (same eye) and formats the match file.
std::string match_frames(const std::filesystem::path& frame_a, const std::filesystem::path& frame_b,
                         Eye eye, const RunConfig& cfg);

/// Appends a weight column to a match file. Each match resolves its track via
/// the id of segment i in `segments_a`; without a tracks file every track
/// counts two observations (the two matched frames).
std::string weight_matches(const std::string& match_text, const std::string& segments_a_text,
                           const std::string* tracks_text, const RunConfig& cfg);

/// Optimizes a text-format graph in place and returns a one-line report.
std::string optimize_graph_text(std::string& graph_text, const RunConfig& cfg);

struct RunSummary {
  std::string run_id;
  double ate_rmse_cm = 0.0;
  PrecisionRecall temporal;
  PrecisionRecall stereo;
  PipelineResult result;
};

/// Runs the pipeline and writes metrics.csv, timings.csv, trajectory.txt,
/// gt_trajectory.txt, match_log.csv, weight_log.csv and config.txt.
/// metrics.csv holds only deterministic values.
RunSummary run_to_directory(const RunConfig& cfg, const std::filesystem::path& out);

std::string metrics_csv(const RunSummary& summary, const RunConfig& cfg);

/// ATE RMSE in centimeters, formatted with two decimals.
std::string evaluate_files(const std::filesystem::path& est, const std::filesystem::path& ref);

}  // namespace otpl
