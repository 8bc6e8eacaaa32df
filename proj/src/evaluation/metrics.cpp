#include "otpl/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <Eigen/Geometry>

#include "otpl/common/errors.hpp"

namespace otpl {

Trajectory::Trajectory(std::vector<StampedPose> poses) {
  for (const StampedPose& p : poses) push_back(p.timestamp, p.pose);
}

void Trajectory::push_back(double timestamp, const PoseSE3& pose) {
  if (!std::isfinite(timestamp)) throw InvalidInput("trajectory: non-finite timestamp");
  if (!poses_.empty() && !(timestamp > poses_.back().timestamp)) {
    throw InvalidInput("trajectory: timestamps must be strictly increasing");
  }
  poses_.push_back({timestamp, pose});
}

std::vector<PositionPair> associate_by_time(const Trajectory& est, const Trajectory& ref,
                                            double max_dt) {
  std::vector<PositionPair> pairs;
  const auto& r = ref.poses();
  std::vector<bool> used(r.size(), false);
  for (const StampedPose& e : est.poses()) {
    const auto it = std::lower_bound(
        r.begin(), r.end(), e.timestamp,
        [](const StampedPose& p, double t) { return p.timestamp < t; });
    std::ptrdiff_t best = -1;
    double best_dt = max_dt;
    for (auto c : {it - 1, it}) {
      if (c < r.begin() || c >= r.end()) continue;
      const double dt = std::abs(c->timestamp - e.timestamp);
      const auto k = c - r.begin();
      if (dt <= best_dt && !used[k]) {
        best = k;
        best_dt = dt;
      }
    }
    if (best >= 0) {
      used[best] = true;
      pairs.push_back({e.pose.translation(), r[best].pose.translation()});
    }
  }
  return pairs;
}

PoseSE3 align_rigid(std::span<const PositionPair> pairs) {
  if (pairs.size() < 3) {
    throw InsufficientOverlap("alignment needs at least 3 associated poses, got " +
                              std::to_string(pairs.size()));
  }
  Eigen::Matrix3Xd src(3, pairs.size());
  Eigen::Matrix3Xd dst(3, pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    src.col(k) = pairs[k].est;
    dst.col(k) = pairs[k].ref;
  }
  const Eigen::Matrix4d t = Eigen::umeyama(src, dst, false);
  // Re-orthonormalize to stay within the PoseSE3 tolerance.
  const Eigen::Quaterniond q(Mat3(t.topLeftCorner<3, 3>()));
  return PoseSE3::from_quaternion(q.normalized(), t.topRightCorner<3, 1>());
}

PoseSE3 align_rigid(const Trajectory& est, const Trajectory& ref, double max_dt) {
  const auto pairs = associate_by_time(est, ref, max_dt);
  return align_rigid(pairs);
}

double ate_rmse_cm(const Trajectory& est, const Trajectory& ref, double max_dt) {
  const auto pairs = associate_by_time(est, ref, max_dt);
  const PoseSE3 t = align_rigid(pairs);
  double sum = 0.0;
  for (const PositionPair& p : pairs) sum += (t * p.est - p.ref).squaredNorm();
  return 100.0 * std::sqrt(sum / static_cast<double>(pairs.size()));
}

PrecisionRecall match_precision_recall(const MatchSet& matches, std::span<const Id> ids_a,
                                       std::span<const Id> ids_b) {
  PrecisionRecall out;
  for (const Match& m : matches.pairs) {
    if (m.i < 0 || m.j < 0 || static_cast<std::size_t>(m.i) >= ids_a.size() ||
        static_cast<std::size_t>(m.j) >= ids_b.size()) {
      throw InvalidInput("precision/recall: match index out of range");
    }
    ++out.accepted;
    if (ids_a[m.i] == ids_b[m.j]) ++out.correct;
  }
  const std::multiset<Id> in_b(ids_b.begin(), ids_b.end());
  std::set<Id> counted;
  for (Id id : ids_a) {
    if (in_b.count(id) != 0 && counted.insert(id).second) ++out.possible;
  }
  out.precision = out.accepted == 0 ? 1.0 : static_cast<double>(out.correct) / out.accepted;
  out.recall = out.possible == 0 ? 1.0 : static_cast<double>(out.correct) / out.possible;
  return out;
}

ConfidenceInterval bootstrap_mean_ci(std::span<const double> samples, double level,
                                     int resamples, std::uint64_t seed) {
  if (samples.empty()) throw InvalidInput("bootstrap: no samples");
  if (!(level > 0.0 && level < 1.0) || resamples < 1) {
    throw InvalidInput("bootstrap: invalid level or resample count");
  }
  const auto n = samples.size();
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(n);

  std::mt19937_64 rng(seed);
  std::vector<double> means(resamples);
  for (int r = 0; r < resamples; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += samples[rng() % n];
    means[r] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 0.5 * (1.0 - level);
  auto at = [&](double q) {
    const auto k = static_cast<std::size_t>(std::clamp(
        std::floor(q * (resamples - 1) + 0.5), 0.0, static_cast<double>(resamples - 1)));
    return means[k];
  };
  return {mean, at(alpha), at(1.0 - alpha)};
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidInput("median: empty input");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace otpl
