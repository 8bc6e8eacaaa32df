#pragma once

#include <span>
#include <string>
#include <vector>

#include "otpl/association/sinkhorn.hpp"
#include "otpl/descriptor/line_descriptor.hpp"
#include "otpl/geometry/line.hpp"

namespace otpl {

struct Match {
  int i = 0;
  int j = 0;
  double confidence = 0.0;

  bool operator==(const Match&) const = default;
};

/// One-to-one correspondences between frames A and B.
struct MatchSet {
  std::vector<Match> pairs;  // sorted by i
  std::vector<int> unmatched_a;
  std::vector<int> unmatched_b;
  bool converged = true;  // false when the transport solver hit max_iters
  std::string warning;
};

/// Segment lengths, the transported mass.
VecX compute_masses(std::span<const LineSegment2D> segments);

/// C_ij = 1 - <f_i, f_j>, clamped to [0, 2].
MatX descriptor_cost(std::span<const LineDescriptor> a, std::span<const LineDescriptor> b);

/// T_ij = P_ij / (a_i + eta) on the top-left M x N block of the plan.
MatX confidence(const TransportPlan& plan, const VecX& a, double eta);

/// Accepts (i, j) when j is the row argmax, i the column argmax and
/// T_ij > delta. Ties resolve to the lowest index.
MatchSet mutual_best(const MatX& confidence, double delta);

/// masses -> cost -> augment -> sinkhorn -> confidence -> mutual_best.
/// Segments shorter than 1 px are left unmatched.
MatchSet associate_lines(std::span<const LineSegment2D> segs_a,
                         std::span<const LineSegment2D> segs_b,
                         std::span<const LineDescriptor> descs_a,
                         std::span<const LineDescriptor> descs_b, const OTConfig& cfg);

/// Greedy nearest-neighbor baseline: candidate pairs are visited by
/// decreasing cosine similarity and accepted while both sides are free.
/// Confidence holds the similarity; there is no threshold.
MatchSet nearest_neighbor_match(std::span<const LineDescriptor> descs_a,
                                std::span<const LineDescriptor> descs_b);

}  // namespace otpl
