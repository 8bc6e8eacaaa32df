#pragma once

#include <span>

#include "otpl/common/types.hpp"
#include "otpl/descriptor/feature_map.hpp"
#include "otpl/geometry/line.hpp"

namespace otpl {

struct DescriptorConfig {
  int n_samples = 100;
  double neighbor_radius_px = 3.0;
  double rho_0 = 0.1;  // 1/px

  void validate() const;
};

/// Average of n_samples bilinear samples spaced uniformly from start to end
/// (both included), l2-normalized. Samples are clamped to the grid.
/// Throws DegenerateDescriptor when the mean has norm < 1e-12.
VecX pool_segment(const FeatureMap& map, const LineSegment2D& segment, int n_samples);

/// Keypoints strictly closer than `radius` to the line through the segment and
/// projecting inside it, divided by the segment length.
double local_point_density(const LineSegment2D& segment, std::span<const Vec2> keypoints,
                           double radius);

struct BranchWeights {
  double gamma_pt = 0.0;
  double gamma_line = 1.0;
};

BranchWeights branch_weights(double rho, double rho_0);

struct LineDescriptor {
  VecX vector;  // [line block; point block], unit norm
  double gamma_line = 1.0;
  double gamma_pt = 0.0;
};

/// Weighted concatenation of the pooled line and point branches. If exactly
/// one branch is degenerate its block is zero and the other takes full weight;
/// if both are, DegenerateDescriptor is thrown.
LineDescriptor build_descriptor(const FeatureMap& map_line, const FeatureMap& map_pt,
                                const LineSegment2D& segment, std::span<const Vec2> keypoints,
                                const DescriptorConfig& cfg);

}  // namespace otpl
