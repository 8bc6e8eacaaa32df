#pragma once

#include <map>
#include <span>
#include <vector>

#include "otpl/association/matcher.hpp"
#include "otpl/common/types.hpp"

namespace otpl {

/// VarianceForm divides lambda by sigma_theta^2; StddevForm divides by
/// sigma_theta, as in the step-by-step weighting procedure.
enum class WeightForm { Variance, Stddev };

struct WeightConfig {
  double sigma_base = 1.0;
  double kappa = 40000.0;  // px^2
  double lambda = 1.0;
  double w_min = 0.1;
  int tau_trk = 3;
  WeightForm form = WeightForm::Variance;

  void validate() const;
};

/// sigma_base^2 + kappa / max(L, 1)^2.
double orientation_variance(double length_px, const WeightConfig& cfg);

double geometric_weight(double sigma_theta_sq, const WeightConfig& cfg);

/// 1 once a track has been seen in tau_trk frames, w_min before that.
double visibility_weight(int n_obs, const WeightConfig& cfg);

/// w_geo(L) * w_vis(n_obs).
double line_weight(double length_px, int n_obs, const WeightConfig& cfg);

struct LineTrack {
  Id track_id = 0;
  int n_obs = 1;  // keyframes in which the track was associated
  Vec2 p_s = Vec2::Zero();  // endpoints of the latest observation
  Vec2 p_e = Vec2::Zero();
};

using TrackTable = std::map<Id, LineTrack>;

/// One weight per accepted match, in match order. Match index i resolves to
/// its track through track_of_a[i]. Throws MissingTrack for unknown ids.
std::vector<double> line_weights(const MatchSet& matches, std::span<const Id> track_of_a,
                                 const TrackTable& tracks, const WeightConfig& cfg);

}  // namespace otpl
