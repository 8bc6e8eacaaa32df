#include "otpl/descriptor/line_descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "otpl/common/errors.hpp"

namespace otpl {

void DescriptorConfig::validate() const {
  if (n_samples < 2) throw InvalidInput("descriptor: n_samples must be >= 2");
  if (!(neighbor_radius_px > 0.0)) throw InvalidInput("descriptor: r must be positive");
  if (!(rho_0 > 0.0)) throw InvalidInput("descriptor: rho_0 must be positive");
}

VecX pool_segment(const FeatureMap& map, const LineSegment2D& segment, int n_samples) {
  if (n_samples < 2) throw InvalidInput("pool_segment: n_samples must be >= 2");
  const double max_x = (map.width() - 1) / map.scale();
  const double max_y = (map.height() - 1) / map.scale();

  VecX sum = VecX::Zero(map.depth());
  const Vec2 step = segment.end() - segment.start();
  for (int k = 0; k < n_samples; ++k) {
    const double t = static_cast<double>(k) / (n_samples - 1);
    Vec2 p = segment.start() + t * step;
    p.x() = std::clamp(p.x(), 0.0, max_x);
    p.y() = std::clamp(p.y(), 0.0, max_y);
    sum += sample_bilinear(map, p);
  }
  const VecX mean = sum / n_samples;
  const double norm = mean.norm();
  if (!(norm >= 1e-12)) throw DegenerateDescriptor("pooled feature has vanishing norm");
  return mean / norm;
}

double local_point_density(const LineSegment2D& segment, std::span<const Vec2> keypoints,
                           double radius) {
  const double length = segment.length();
  if (!(length > 0.0)) return 0.0;
  const Vec2 dir = (segment.end() - segment.start()) / length;
  int near = 0;
  for (const Vec2& k : keypoints) {
    const Vec2 rel = k - segment.start();
    const double along = rel.dot(dir) / length;
    const double across = std::abs(dir.x() * rel.y() - dir.y() * rel.x());
    if (along >= 0.0 && along <= 1.0 && across < radius) ++near;
  }
  return near / length;
}

BranchWeights branch_weights(double rho, double rho_0) {
  if (!(rho >= 0.0) || !(rho_0 > 0.0)) throw InvalidInput("branch_weights: need rho >= 0, rho_0 > 0");
  const double total = rho + rho_0;
  return {rho / total, rho_0 / total};
}

LineDescriptor build_descriptor(const FeatureMap& map_line, const FeatureMap& map_pt,
                                const LineSegment2D& segment, std::span<const Vec2> keypoints,
                                const DescriptorConfig& cfg) {
  auto pool = [&](const FeatureMap& map) -> std::optional<VecX> {
    try {
      return pool_segment(map, segment, cfg.n_samples);
    } catch (const DegenerateDescriptor&) {
      return std::nullopt;
    }
  };
  const std::optional<VecX> f_line = pool(map_line);
  const std::optional<VecX> f_pt = pool(map_pt);
  if (!f_line && !f_pt) throw DegenerateDescriptor("both descriptor branches are degenerate");

  BranchWeights gamma = branch_weights(
      local_point_density(segment, keypoints, cfg.neighbor_radius_px), cfg.rho_0);
  if (!f_line) gamma = {1.0, 0.0};
  if (!f_pt) gamma = {0.0, 1.0};

  LineDescriptor out;
  out.gamma_line = gamma.gamma_line;
  out.gamma_pt = gamma.gamma_pt;
  out.vector = VecX::Zero(map_line.depth() + map_pt.depth());
  if (f_line) out.vector.head(map_line.depth()) = gamma.gamma_line * *f_line;
  if (f_pt) out.vector.tail(map_pt.depth()) = gamma.gamma_pt * *f_pt;
  out.vector /= out.vector.norm();
  return out;
}

}  // namespace otpl
