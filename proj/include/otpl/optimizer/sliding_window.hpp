#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "otpl/optimizer/factor_graph.hpp"

namespace otpl {

struct KeyframeInsertion {
  Id id = 0;
  PoseSE3 pose;
  std::map<Id, Vec3> new_points;
  std::map<Id, LineVariable> new_lines;
  std::vector<PointFactor> point_factors;
  std::vector<LineFactor> line_factors;
};

/// Inserts a keyframe with its landmarks and factors. While the window holds
/// more than window_size poses the oldest (lowest id) is dropped with all of
/// its factors, after which landmarks left with fewer than two factors are
/// removed and the oldest remaining pose becomes the fixed gauge anchor.
void marginal_window_update(FactorGraph& graph, KeyframeInsertion keyframe,
                            std::size_t window_size);

}  // namespace otpl
