#pragma once

#include "otpl/common/types.hpp"

namespace otpl {

struct OTConfig {
  double tau = 0.15;      // virtual-node cost
  double epsilon = 0.05;  // entropy weight
  double eta = 1e-8;      // confidence denominator guard
  double delta = 0.6;     // acceptance threshold on confidence
  int max_iters = 200;
  double tol = 1e-6;  // marginal violation relative to total mass

  void validate() const;
};

struct AugmentedProblem {
  MatX cost;  // (M+1) x (N+1)
  VecX a_hat;
  VecX b_hat;
};

/// Appends one virtual node per side: a_hat = [a; sum b], b_hat = [b; sum a],
/// cost tau on the virtual row and column and 0 in the corner.
AugmentedProblem augment(const MatX& cost, const VecX& a, const VecX& b, double tau);

struct TransportPlan {
  MatX plan;
  VecX a_hat;
  VecX b_hat;
  int iterations_used = 0;
  double marginal_error = 0.0;  // max absolute row/column violation
  bool converged = false;
};

/// Entropic OT by alternating dual updates in the log domain. Stops when the
/// row violation drops to tol * sum(a_hat) (columns are exact after each
/// update) or after max_iters; `converged` reports which happened.
/// Throws InvalidInput unless sum(a_hat) == sum(b_hat) > 0 and epsilon > 0.
TransportPlan sinkhorn(const MatX& cost, const VecX& a_hat, const VecX& b_hat,
                       const OTConfig& cfg);

}  // namespace otpl
