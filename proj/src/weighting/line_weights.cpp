#include "otpl/weighting/line_weights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "otpl/common/errors.hpp"

namespace otpl {

void WeightConfig::validate() const {
  if (!(sigma_base > 0.0)) throw InvalidInput("weight: sigma_base must be positive");
  if (!(kappa >= 0.0)) throw InvalidInput("weight: kappa must be non-negative");
  if (!(lambda > 0.0)) throw InvalidInput("weight: lambda must be positive");
  if (!(w_min > 0.0 && w_min <= 1.0)) throw InvalidInput("weight: w_min must lie in (0, 1]");
  if (tau_trk < 1) throw InvalidInput("weight: tau_trk must be >= 1");
}

double orientation_variance(double length_px, const WeightConfig& cfg) {
  const double length = std::max(length_px, 1.0);
  return cfg.sigma_base * cfg.sigma_base + cfg.kappa / (length * length);
}

double geometric_weight(double sigma_theta_sq, const WeightConfig& cfg) {
  if (!(sigma_theta_sq > 0.0)) throw InvalidInput("geometric_weight: variance must be positive");
  const double spread =
      cfg.form == WeightForm::Variance ? sigma_theta_sq : std::sqrt(sigma_theta_sq);
  return std::max(cfg.lambda / spread, cfg.w_min);
}

double visibility_weight(int n_obs, const WeightConfig& cfg) {
  if (n_obs < 1) throw InvalidInput("visibility_weight: n_obs must be >= 1");
  return n_obs >= cfg.tau_trk ? 1.0 : cfg.w_min;
}

double line_weight(double length_px, int n_obs, const WeightConfig& cfg) {
  return geometric_weight(orientation_variance(length_px, cfg), cfg) *
         visibility_weight(n_obs, cfg);
}

std::vector<double> line_weights(const MatchSet& matches, std::span<const Id> track_of_a,
                                 const TrackTable& tracks, const WeightConfig& cfg) {
  std::vector<double> out;
  out.reserve(matches.pairs.size());
  for (const Match& m : matches.pairs) {
    if (m.i < 0 || static_cast<std::size_t>(m.i) >= track_of_a.size()) {
      throw MissingTrack("match index " + std::to_string(m.i) + " has no track id");
    }
    const auto it = tracks.find(track_of_a[m.i]);
    if (it == tracks.end()) {
      throw MissingTrack("unknown track id " + std::to_string(track_of_a[m.i]));
    }
    const LineTrack& track = it->second;
    out.push_back(line_weight((track.p_e - track.p_s).norm(), track.n_obs, cfg));
  }
  return out;
}

}  // namespace otpl
