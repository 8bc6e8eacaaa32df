#include "otpl/optimizer/sliding_window.hpp"

#include <algorithm>

#include "otpl/common/errors.hpp"

namespace otpl {

void marginal_window_update(FactorGraph& graph, KeyframeInsertion keyframe,
                            std::size_t window_size) {
  if (window_size < 2) throw InvalidInput("sliding window: window_size must be >= 2");
  if (graph.poses.count(keyframe.id) != 0) {
    throw InvalidInput("sliding window: keyframe id already present");
  }

  graph.poses[keyframe.id] = PoseVariable{keyframe.pose, false};
  for (auto& [id, p] : keyframe.new_points) graph.points[id] = PointVariable{p, false};
  for (auto& [id, l] : keyframe.new_lines) {
    graph.lines[id] = LineVariable{l.line.normalized(), false, l.anchor};
  }
  for (auto& f : keyframe.point_factors) graph.point_factors.push_back(std::move(f));
  for (auto& f : keyframe.line_factors) graph.line_factors.push_back(std::move(f));

  bool dropped = false;
  while (graph.poses.size() > window_size) {
    const Id oldest = graph.poses.begin()->first;
    graph.poses.erase(graph.poses.begin());
    std::erase_if(graph.point_factors, [&](const PointFactor& f) { return f.pose_id == oldest; });
    std::erase_if(graph.line_factors, [&](const LineFactor& f) { return f.pose_id == oldest; });
    dropped = true;
  }

  if (dropped) {
    std::map<Id, int> point_count;
    std::map<Id, int> line_count;
    for (const auto& f : graph.point_factors) ++point_count[f.point_id];
    for (const auto& f : graph.line_factors) ++line_count[f.line_id];
    std::erase_if(graph.points, [&](const auto& kv) { return point_count[kv.first] < 2; });
    std::erase_if(graph.lines, [&](const auto& kv) { return line_count[kv.first] < 2; });
    std::erase_if(graph.point_factors,
                  [&](const PointFactor& f) { return graph.points.count(f.point_id) == 0; });
    std::erase_if(graph.line_factors,
                  [&](const LineFactor& f) { return graph.lines.count(f.line_id) == 0; });
    for (auto& [id, v] : graph.poses) v.fixed = false;
    graph.poses.begin()->second.fixed = true;
  } else if (!graph.has_fixed_pose()) {
    graph.poses.begin()->second.fixed = true;
  }
}

}  // namespace otpl
