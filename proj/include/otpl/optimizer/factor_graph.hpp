#pragma once

#include <map>
#include <vector>

#include "otpl/common/types.hpp"
#include "otpl/geometry/camera.hpp"
#include "otpl/geometry/line.hpp"
#include "otpl/geometry/pose.hpp"

namespace otpl {

/// Huber loss on a squared norm s: s inside delta^2, 2 delta sqrt(s) - delta^2 outside.
double huber_loss(double squared_norm, double delta);
/// d huber_loss / d s.
double huber_loss_derivative(double squared_norm, double delta);

struct PointFactor {
  Id pose_id = 0;
  Id point_id = 0;
  Eye eye = Eye::Left;
  Vec2 observed = Vec2::Zero();
  double sigma = 1.0;         // px
  double robust_delta = 2.0;  // applied to the whitened residual
};

/// Contributes weight * huber(|r|^2) for the endpoint-to-line residual r.
struct LineFactor {
  Id pose_id = 0;
  Id line_id = 0;
  Eye eye = Eye::Left;
  LineSegment2D observed;
  double weight = 1.0;
  double robust_delta = 2.0;  // px
};

struct PoseVariable {
  PoseSE3 pose;  // T_cw
  bool fixed = false;
};

struct PointVariable {
  Vec3 position = Vec3::Zero();
  bool fixed = false;
};

struct LineVariable {
  PluckerLine line;  // world frame, |d| = 1
  bool fixed = false;
  Vec3 anchor = Vec3::Zero();  // center of the tangent chart, e.g. a viewing camera
};

struct FactorGraph {
  CameraModel camera;
  std::map<Id, PoseVariable> poses;
  std::map<Id, PointVariable> points;
  std::map<Id, LineVariable> lines;
  std::vector<PointFactor> point_factors;
  std::vector<LineFactor> line_factors;

  /// Throws InvalidInput on dangling references or invalid factor parameters.
  void validate() const;
  bool has_fixed_pose() const;
};

struct CostBreakdown {
  double point = 0.0;
  double line = 0.0;
  int skipped = 0;  // factors whose projection was degenerate

  double total() const { return point + line; }
};

CostBreakdown evaluate_cost(const FactorGraph& graph);

/// Sum of robust point and weighted robust line terms.
double total_cost(const FactorGraph& graph);

/// Offsets of the free variables in a stacked tangent vector: poses (6 each),
/// then points (3), then lines (4), each in id order.
struct StateLayout {
  std::map<Id, int> pose_offset;
  std::map<Id, int> point_offset;
  std::map<Id, int> line_offset;
  int dimension = 0;

  static StateLayout of(const FactorGraph& graph);
};

/// Gradient of total_cost along the tangent directions of `layout`.
VecX cost_gradient(const FactorGraph& graph, const StateLayout& layout);

/// Applies a stacked tangent step to every free variable.
FactorGraph retract(const FactorGraph& graph, const StateLayout& layout, const VecX& delta);

}  // namespace otpl
