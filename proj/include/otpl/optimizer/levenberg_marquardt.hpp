#pragma once

#include "otpl/optimizer/factor_graph.hpp"

namespace otpl {

struct SolverConfig {
  int max_iterations = 50;
  double initial_damping = 1e-4;
  double relative_decrease = 1e-8;
  double gradient_tolerance = 1e-10;
  double huber_delta_px = 2.0;
  double max_damping = 1e8;

  void validate() const;
};

enum class Termination { GradientTolerance, RelativeDecrease, MaxIterations };

struct SolverReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  bool converged = false;
  Termination termination = Termination::MaxIterations;
  int skipped_factors = 0;
};

/// Levenberg-Marquardt on the normal equations with landmarks eliminated by
/// Schur complement. A step that cannot lower the cost even at max_damping
/// counts as a zero relative decrease. Rejected steps leave the graph
/// untouched. Throws InvalidInput when no pose is fixed and
/// SingularNormalEquations when the damped system cannot be solved at
/// max_damping.
SolverReport optimize(FactorGraph& graph, const SolverConfig& cfg);

}  // namespace otpl
