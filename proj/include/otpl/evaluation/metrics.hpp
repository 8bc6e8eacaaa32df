#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "otpl/association/matcher.hpp"
#include "otpl/geometry/pose.hpp"

namespace otpl {

struct StampedPose {
  double timestamp = 0.0;  // s
  PoseSE3 pose;            // T_wc
};

/// Camera-to-world poses with strictly increasing timestamps.
class Trajectory {
 public:
  Trajectory() = default;
  /// Throws InvalidInput unless timestamps are finite and strictly increasing.
  explicit Trajectory(std::vector<StampedPose> poses);

  /// Throws InvalidInput if `timestamp` does not exceed the last one.
  void push_back(double timestamp, const PoseSE3& pose);

  const std::vector<StampedPose>& poses() const { return poses_; }
  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }

 private:
  std::vector<StampedPose> poses_;
};

inline constexpr double kDefaultMaxTimeDifference = 0.02;  // s

struct PositionPair {
  Vec3 est;
  Vec3 ref;
};

/// Pairs each estimated pose with the nearest reference timestamp within
/// max_dt; each reference pose is used at most once.
std::vector<PositionPair> associate_by_time(const Trajectory& est, const Trajectory& ref,
                                            double max_dt = kDefaultMaxTimeDifference);

/// Rigid T minimizing sum |T p_est - p_ref|^2. Throws InsufficientOverlap
/// with fewer than three associated pairs.
PoseSE3 align_rigid(const Trajectory& est, const Trajectory& ref,
                    double max_dt = kDefaultMaxTimeDifference);
PoseSE3 align_rigid(std::span<const PositionPair> pairs);

/// Translational RMSE after alignment, in centimeters.
double ate_rmse_cm(const Trajectory& est, const Trajectory& ref,
                   double max_dt = kDefaultMaxTimeDifference);

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
  int correct = 0;
  int accepted = 0;
  int possible = 0;
};

/// ids_a[i] / ids_b[j] hold the ground-truth landmark of each segment. A match
/// is correct when both ids agree; possible counts ids present in both frames.
/// An empty match set reports precision 1; zero co-visible pairs report recall 1.
PrecisionRecall match_precision_recall(const MatchSet& matches, std::span<const Id> ids_a,
                                       std::span<const Id> ids_b);

struct ConfidenceInterval {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Percentile bootstrap of the sample mean.
ConfidenceInterval bootstrap_mean_ci(std::span<const double> samples, double level = 0.95,
                                     int resamples = 10000, std::uint64_t seed = 1);

double median(std::vector<double> values);

}  // namespace otpl
