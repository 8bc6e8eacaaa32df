#include "otpl/optimizer/levenberg_marquardt.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "otpl/common/errors.hpp"
#include "otpl/geometry/residuals.hpp"

namespace otpl {

namespace {

// Normal equations H x = -b split into a dense pose block and one small dense
// block per free landmark. b is half the cost gradient.
using LandmarkMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;
using LandmarkVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using CouplingMat = Eigen::Matrix<double, 6, Eigen::Dynamic, 0, 6, 4>;

struct LandmarkBlock {
  int dim = 0;
  LandmarkMat hll;
  LandmarkVec bl;
  std::vector<std::pair<int, CouplingMat>> coupling;  // pose index -> 6 x dim, by first use
};

struct NormalEquations {
  int n_poses = 0;
  MatX hcc;
  VecX bc;
  std::vector<LandmarkBlock> landmarks;
  double gradient_inf_norm = 0.0;
  int skipped = 0;
};

struct Indexing {
  std::map<Id, int> pose;
  std::map<Id, int> point;
  std::map<Id, int> line;
};

Indexing build_indexing(const FactorGraph& graph) {
  Indexing idx;
  int p = 0;
  for (const auto& [id, v] : graph.poses) {
    if (!v.fixed) idx.pose[id] = p++;
  }
  int l = 0;
  for (const auto& [id, v] : graph.points) {
    if (!v.fixed) idx.point[id] = l++;
  }
  for (const auto& [id, v] : graph.lines) {
    if (!v.fixed) idx.line[id] = l++;
  }
  return idx;
}

template <int LandmarkDim>
void accumulate(NormalEquations& ne, int pose_index, int landmark_index, double w,
                const Vec2& e, const Eigen::Matrix<double, 2, 6>& jp,
                const Eigen::Matrix<double, 2, LandmarkDim>& jl) {
  if (pose_index >= 0) {
    ne.hcc.block<6, 6>(6 * pose_index, 6 * pose_index) += w * jp.transpose() * jp;
    ne.bc.segment<6>(6 * pose_index) += w * jp.transpose() * e;
  }
  if (landmark_index >= 0) {
    LandmarkBlock& lm = ne.landmarks[landmark_index];
    lm.hll += w * jl.transpose() * jl;
    lm.bl += w * jl.transpose() * e;
    if (pose_index >= 0) {
      auto it = std::find_if(lm.coupling.begin(), lm.coupling.end(),
                             [&](const auto& c) { return c.first == pose_index; });
      if (it == lm.coupling.end()) {
        lm.coupling.emplace_back(pose_index, CouplingMat::Zero(6, LandmarkDim));
        it = std::prev(lm.coupling.end());
      }
      it->second += w * jp.transpose() * jl;
    }
  }
}

NormalEquations linearize(const FactorGraph& graph, const Indexing& idx) {
  NormalEquations ne;
  ne.n_poses = static_cast<int>(idx.pose.size());
  ne.hcc = MatX::Zero(6 * ne.n_poses, 6 * ne.n_poses);
  ne.bc = VecX::Zero(6 * ne.n_poses);
  ne.landmarks.resize(idx.point.size() + idx.line.size());
  for (const auto& [id, i] : idx.point) {
    ne.landmarks[i] = {3, LandmarkMat::Zero(3, 3), LandmarkVec::Zero(3), {}};
  }
  for (const auto& [id, i] : idx.line) {
    ne.landmarks[i] = {4, LandmarkMat::Zero(4, 4), LandmarkVec::Zero(4), {}};
  }
  auto find_or = [](const std::map<Id, int>& m, Id id) {
    const auto it = m.find(id);
    return it == m.end() ? -1 : it->second;
  };

  for (const PointFactor& f : graph.point_factors) {
    const int pi = find_or(idx.pose, f.pose_id);
    const int li = find_or(idx.point, f.point_id);
    if (pi < 0 && li < 0) continue;
    try {
      const PointResidual r = point_residual_jacobians(
          graph.poses.at(f.pose_id).pose, graph.points.at(f.point_id).position, graph.camera,
          f.eye, f.observed);
      const double inv_sigma = 1.0 / f.sigma;
      const Vec2 e = r.residual * inv_sigma;
      const double w = huber_loss_derivative(e.squaredNorm(), f.robust_delta);
      const Eigen::Matrix<double, 2, 6> jp = r.d_pose * inv_sigma;
      const Eigen::Matrix<double, 2, 3> jl = r.d_point * inv_sigma;
      accumulate<3>(ne, pi, li, w, e, jp, jl);
    } catch (const DegenerateProjection&) {
      ++ne.skipped;
    }
  }
  for (const LineFactor& f : graph.line_factors) {
    const int pi = find_or(idx.pose, f.pose_id);
    const int li = find_or(idx.line, f.line_id);
    if (pi < 0 && li < 0) continue;
    try {
      const LineResidual r =
          line_residual_jacobians(graph.poses.at(f.pose_id).pose, graph.lines.at(f.line_id).line,
                                  graph.camera, f.eye, f.observed, graph.lines.at(f.line_id).anchor);
      const double w = f.weight * huber_loss_derivative(r.residual.squaredNorm(), f.robust_delta);
      accumulate<4>(ne, pi, li, w, r.residual, r.d_pose, r.d_line);
    } catch (const DegenerateProjection&) {
      ++ne.skipped;
    } catch (const DegenerateLine&) {
      ++ne.skipped;
    }
  }

  double g = ne.bc.size() > 0 ? ne.bc.cwiseAbs().maxCoeff() : 0.0;
  for (const LandmarkBlock& lm : ne.landmarks) g = std::max(g, lm.bl.cwiseAbs().maxCoeff());
  ne.gradient_inf_norm = 2.0 * g;
  return ne;
}

template <typename Matrix>
Matrix damped(const Matrix& h, double lambda) {
  Matrix out = h;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    out(i, i) += lambda * std::clamp(h(i, i), 1e-6, 1e32);
  }
  return out;
}

// Solves the damped system; returns false when it is numerically singular.
// With H_ll = L L^T per landmark, the reduced pose system is
// S = H_cc - V V^T with V = W L^-T, built as one dense rank update.
bool solve(const NormalEquations& ne, double lambda, VecX& step_poses,
           std::vector<LandmarkVec>& step_landmarks) {
  const int nc = 6 * ne.n_poses;
  int total_dim = 0;
  for (const LandmarkBlock& lm : ne.landmarks) total_dim += lm.dim;
  MatX v = MatX::Zero(nc, total_dim);
  VecX rhs = -ne.bc;
  std::vector<Eigen::LLT<LandmarkMat>> factors(ne.landmarks.size());
  int col = 0;
  for (std::size_t k = 0; k < ne.landmarks.size(); ++k) {
    const LandmarkBlock& lm = ne.landmarks[k];
    factors[k].compute(damped(lm.hll, lambda));
    if (factors[k].info() != Eigen::Success) return false;
    const LandmarkVec y = factors[k].matrixL().solve(lm.bl);
    if (!y.allFinite()) return false;
    for (const auto& [p, wp] : lm.coupling) {
      const CouplingMat vp = factors[k].matrixL().solve(wp.transpose()).transpose();
      v.block(6 * p, col, 6, lm.dim) = vp;
      rhs.segment<6>(6 * p) += vp * y;
    }
    col += lm.dim;
  }

  step_poses = VecX::Zero(nc);
  if (nc > 0) {
    MatX schur = damped(ne.hcc, lambda);
    schur.selfadjointView<Eigen::Lower>().rankUpdate(v, -1.0);
    Eigen::LDLT<MatX, Eigen::Lower> ldlt(schur);
    if (ldlt.info() != Eigen::Success) return false;
    step_poses = ldlt.solve(rhs);
    if (!step_poses.allFinite()) return false;
    if (!ldlt.isPositive()) return false;
  }

  step_landmarks.resize(ne.landmarks.size());
  for (std::size_t k = 0; k < ne.landmarks.size(); ++k) {
    const LandmarkBlock& lm = ne.landmarks[k];
    LandmarkVec r = -lm.bl;
    for (const auto& [p, wp] : lm.coupling) r -= wp.transpose() * step_poses.segment<6>(6 * p);
    step_landmarks[k] = factors[k].solve(r);
    if (!step_landmarks[k].allFinite()) return false;
  }
  return true;
}

void apply_step(FactorGraph& graph, const Indexing& idx, const VecX& step_poses,
                const std::vector<LandmarkVec>& step_landmarks) {
  for (const auto& [id, i] : idx.pose) {
    PoseVariable& v = graph.poses.at(id);
    v.pose = v.pose.retract(step_poses.segment<6>(6 * i));
  }
  for (const auto& [id, i] : idx.point) graph.points.at(id).position += step_landmarks[i];
  for (const auto& [id, i] : idx.line) {
    LineVariable& v = graph.lines.at(id);
    v.line = line_retract(v.line, Vec4(step_landmarks[i]), v.anchor);
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (max_iterations < 1) throw InvalidInput("solver: max_iterations must be >= 1");
  if (!(initial_damping > 0.0) || !(max_damping >= initial_damping)) {
    throw InvalidInput("solver: damping bounds must be positive and ordered");
  }
  if (!(relative_decrease > 0.0) || !(gradient_tolerance > 0.0) || !(huber_delta_px > 0.0)) {
    throw InvalidInput("solver: tolerances must be positive");
  }
}

SolverReport optimize(FactorGraph& graph, const SolverConfig& cfg) {
  cfg.validate();
  graph.validate();
  if (!graph.poses.empty() && !graph.has_fixed_pose()) {
    throw InvalidInput("optimize: at least one pose must be fixed as gauge anchor");
  }

  const Indexing idx = build_indexing(graph);
  SolverReport report;
  CostBreakdown cost = evaluate_cost(graph);
  report.initial_cost = cost.total();
  report.skipped_factors = cost.skipped;
  double lambda = cfg.initial_damping;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const NormalEquations ne = linearize(graph, idx);
    if (cost.total() == 0.0 || ne.gradient_inf_norm < cfg.gradient_tolerance) {
      report.converged = true;
      report.termination = Termination::GradientTolerance;
      break;
    }

    bool accepted = false;
    bool stalled = false;
    while (!accepted && !stalled) {
      VecX step_poses;
      std::vector<LandmarkVec> step_landmarks;
      if (!solve(ne, lambda, step_poses, step_landmarks)) {
        lambda *= 10.0;
        if (lambda > cfg.max_damping) {
          throw SingularNormalEquations("damped normal equations are singular at maximum damping");
        }
        continue;
      }
      const auto poses = graph.poses;
      const auto points = graph.points;
      const auto lines = graph.lines;
      apply_step(graph, idx, step_poses, step_landmarks);
      const CostBreakdown candidate_cost = evaluate_cost(graph);
      if (candidate_cost.total() < cost.total()) {
        const double relative = (cost.total() - candidate_cost.total()) / cost.total();
        cost = candidate_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        if (relative < cfg.relative_decrease) {
          report.converged = true;
          report.termination = Termination::RelativeDecrease;
        }
      } else {
        graph.poses = poses;
        graph.points = points;
        graph.lines = lines;
        lambda *= 10.0;
        if (lambda > cfg.max_damping) stalled = true;
      }
    }
    report.iterations = iter + 1;
    if (stalled) {
      report.converged = true;
      report.termination = Termination::RelativeDecrease;
    }
    if (report.converged) break;
  }

  report.final_cost = cost.total();
  report.skipped_factors = cost.skipped;
  return report;
}

}  // namespace otpl
