#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "otpl/association/matcher.hpp"
#include "otpl/descriptor/feature_map.hpp"
#include "otpl/evaluation/metrics.hpp"
#include "otpl/optimizer/factor_graph.hpp"
#include "otpl/simulator/render.hpp"
#include "otpl/weighting/line_weights.hpp"

namespace otpl {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double value);

/// Whole-string parses; throw FormatError on trailing characters or overflow.
double parse_double(const std::string& text);
long long parse_int(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories. Throws IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Little-endian: "FMAP", u32 depth, u32 height, u32 width, f32 scale, then
/// depth * height * width float32 values, channel-major then row-major.
/// Values are stored as float, so maps whose values are floats round-trip exactly.
std::string encode_feature_map(const FeatureMap& map);
/// Throws FormatError naming expected and actual byte counts on truncation.
FeatureMap decode_feature_map(const std::string& bytes);
void write_feature_map(const std::filesystem::path& path, const FeatureMap& map);
FeatureMap read_feature_map(const std::filesystem::path& path);

/// One segment per line: "id x_s y_s x_e y_e".
std::string format_segments(const std::vector<LineSegment2D>& segments);
/// Errors report the line number and byte offset. Lines starting with '#' are skipped.
std::vector<LineSegment2D> parse_segments(const std::string& text);

/// One keypoint per line: "id u v".
std::string format_keypoints(const std::vector<Keypoint>& keypoints);
std::vector<Keypoint> parse_keypoints(const std::string& text);

/// "i j T_ij" per pair (plus " w_ij" when weights are given), then
/// "# unmatched_a: ..." and "# unmatched_b: ..." lines.
std::string format_matches(const MatchSet& matches, const std::vector<double>& weights = {});
struct ParsedMatches {
  MatchSet matches;
  std::vector<double> weights;  // empty when the file has no weight column
};
ParsedMatches parse_matches(const std::string& text);

/// "track_id n_obs" per line.
std::string format_tracks(const TrackTable& tracks);
/// Endpoints are left zero; callers fill them from the segment file.
TrackTable parse_tracks(const std::string& text);

/// TUM: "timestamp tx ty tz qx qy qz qw" per line, poses camera-to-world.
std::string format_tum(const Trajectory& trajectory);
/// Errors (including non-increasing timestamps) report the line number.
Trajectory parse_tum(const std::string& text);

/// Text form of a factor graph:
///   CAMERA fx fy cx cy baseline width height
///   POSE id fixed tx ty tz qx qy qz qw          (T_cw)
///   POINT id fixed x y z
///   LINE id fixed nx ny nz dx dy dz ax ay az    (anchor last)
///   PF pose point L|R u v sigma robust_delta
///   LF pose line L|R xs ys xe ye weight robust_delta
std::string format_graph(const FactorGraph& graph);
FactorGraph parse_graph(const std::string& text);

/// Descriptor dump: "id gamma_line gamma_pt v_0 ... v_{2D-1}" per segment.
std::string format_descriptors(const std::vector<LineSegment2D>& segments,
                               const std::vector<LineDescriptor>& descriptors);

}  // namespace otpl
