#include "otpl/optimizer/factor_graph.hpp"

#include <cmath>
#include <string>

#include "otpl/common/errors.hpp"
#include "otpl/geometry/residuals.hpp"

namespace otpl {

double huber_loss(double squared_norm, double delta) {
  const double d2 = delta * delta;
  if (squared_norm <= d2) return squared_norm;
  return 2.0 * delta * std::sqrt(squared_norm) - d2;
}

double huber_loss_derivative(double squared_norm, double delta) {
  if (squared_norm <= delta * delta) return 1.0;
  return delta / std::sqrt(squared_norm);
}

void FactorGraph::validate() const {
  camera.validate();
  for (const PointFactor& f : point_factors) {
    if (!poses.contains(f.pose_id) || !points.contains(f.point_id)) {
      throw InvalidInput("point factor references a missing variable (pose " +
                         std::to_string(f.pose_id) + ", point " + std::to_string(f.point_id) + ")");
    }
    if (!(f.sigma > 0.0) || !(f.robust_delta > 0.0)) {
      throw InvalidInput("point factor needs sigma > 0 and robust_delta > 0");
    }
  }
  for (const LineFactor& f : line_factors) {
    if (!poses.contains(f.pose_id) || !lines.contains(f.line_id)) {
      throw InvalidInput("line factor references a missing variable (pose " +
                         std::to_string(f.pose_id) + ", line " + std::to_string(f.line_id) + ")");
    }
    if (!(f.weight > 0.0) || !(f.robust_delta > 0.0)) {
      throw InvalidInput("line factor needs weight > 0 and robust_delta > 0");
    }
  }
}

bool FactorGraph::has_fixed_pose() const {
  for (const auto& [id, v] : poses) {
    if (v.fixed) return true;
  }
  return false;
}

CostBreakdown evaluate_cost(const FactorGraph& graph) {
  CostBreakdown out;
  for (const PointFactor& f : graph.point_factors) {
    try {
      const PointResidual r =
          point_residual_jacobians(graph.poses.at(f.pose_id).pose,
                                   graph.points.at(f.point_id).position, graph.camera, f.eye,
                                   f.observed);
      out.point += huber_loss(r.residual.squaredNorm() / (f.sigma * f.sigma), f.robust_delta);
    } catch (const DegenerateProjection&) {
      ++out.skipped;
    }
  }
  for (const LineFactor& f : graph.line_factors) {
    try {
      const PoseSE3 pose = eye_pose(graph.poses.at(f.pose_id).pose, f.eye, graph.camera);
      const Line2D l = project_line(transform_plucker(graph.lines.at(f.line_id).line, pose),
                                    graph.camera);
      const Vec2 r = line_reprojection_residual(l, f.observed);
      out.line += f.weight * huber_loss(r.squaredNorm(), f.robust_delta);
    } catch (const DegenerateProjection&) {
      ++out.skipped;
    } catch (const DegenerateLine&) {
      ++out.skipped;
    }
  }
  return out;
}

double total_cost(const FactorGraph& graph) { return evaluate_cost(graph).total(); }

StateLayout StateLayout::of(const FactorGraph& graph) {
  StateLayout layout;
  int offset = 0;
  for (const auto& [id, v] : graph.poses) {
    if (v.fixed) continue;
    layout.pose_offset[id] = offset;
    offset += 6;
  }
  for (const auto& [id, v] : graph.points) {
    if (v.fixed) continue;
    layout.point_offset[id] = offset;
    offset += 3;
  }
  for (const auto& [id, v] : graph.lines) {
    if (v.fixed) continue;
    layout.line_offset[id] = offset;
    offset += 4;
  }
  layout.dimension = offset;
  return layout;
}

VecX cost_gradient(const FactorGraph& graph, const StateLayout& layout) {
  VecX grad = VecX::Zero(layout.dimension);
  for (const PointFactor& f : graph.point_factors) {
    try {
      const PointResidual r =
          point_residual_jacobians(graph.poses.at(f.pose_id).pose,
                                   graph.points.at(f.point_id).position, graph.camera, f.eye,
                                   f.observed);
      const double inv_var = 1.0 / (f.sigma * f.sigma);
      const double w =
          2.0 * inv_var * huber_loss_derivative(r.residual.squaredNorm() * inv_var, f.robust_delta);
      if (auto it = layout.pose_offset.find(f.pose_id); it != layout.pose_offset.end()) {
        grad.segment<6>(it->second) += w * r.d_pose.transpose() * r.residual;
      }
      if (auto it = layout.point_offset.find(f.point_id); it != layout.point_offset.end()) {
        grad.segment<3>(it->second) += w * r.d_point.transpose() * r.residual;
      }
    } catch (const DegenerateProjection&) {
    }
  }
  for (const LineFactor& f : graph.line_factors) {
    try {
      const LineResidual r =
          line_residual_jacobians(graph.poses.at(f.pose_id).pose, graph.lines.at(f.line_id).line,
                                  graph.camera, f.eye, f.observed, graph.lines.at(f.line_id).anchor);
      const double w =
          2.0 * f.weight * huber_loss_derivative(r.residual.squaredNorm(), f.robust_delta);
      if (auto it = layout.pose_offset.find(f.pose_id); it != layout.pose_offset.end()) {
        grad.segment<6>(it->second) += w * r.d_pose.transpose() * r.residual;
      }
      if (auto it = layout.line_offset.find(f.line_id); it != layout.line_offset.end()) {
        grad.segment<4>(it->second) += w * r.d_line.transpose() * r.residual;
      }
    } catch (const DegenerateProjection&) {
    } catch (const DegenerateLine&) {
    }
  }
  return grad;
}

FactorGraph retract(const FactorGraph& graph, const StateLayout& layout, const VecX& delta) {
  if (delta.size() != layout.dimension) throw InvalidInput("retract: step has wrong dimension");
  FactorGraph out = graph;
  for (const auto& [id, offset] : layout.pose_offset) {
    PoseVariable& v = out.poses.at(id);
    v.pose = v.pose.retract(delta.segment<6>(offset));
  }
  for (const auto& [id, offset] : layout.point_offset) {
    out.points.at(id).position += delta.segment<3>(offset);
  }
  for (const auto& [id, offset] : layout.line_offset) {
    LineVariable& v = out.lines.at(id);
    v.line = line_retract(v.line, delta.segment<4>(offset), v.anchor);
  }
  return out;
}

}  // namespace otpl
