#include "otpl/association/sinkhorn.hpp"

#include <cmath>
#include <limits>

#include "otpl/common/errors.hpp"

namespace otpl {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log sum_k exp(row[k] + shift[k]); -inf when every term is -inf.
double log_sum_exp(const double* row, const double* shift, Eigen::Index n) {
  double peak = kNegInf;
  for (Eigen::Index k = 0; k < n; ++k) peak = std::max(peak, row[k] + shift[k]);
  if (peak == kNegInf) return kNegInf;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) acc += std::exp(row[k] + shift[k] - peak);
  return peak + std::log(acc);
}

VecX safe_log(const VecX& v) {
  VecX out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? std::log(v[i]) : kNegInf;
  return out;
}

}  // namespace

void OTConfig::validate() const {
  if (!(epsilon > 0.0)) throw InvalidInput("ot: epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("ot: delta must lie in (0, 1)");
  if (!(tau >= 0.0)) throw InvalidInput("ot: tau must be non-negative");
  if (!(eta >= 0.0)) throw InvalidInput("ot: eta must be non-negative");
  if (max_iters < 1) throw InvalidInput("ot: max_iters must be >= 1");
  if (!(tol > 0.0)) throw InvalidInput("ot: tol must be positive");
}

AugmentedProblem augment(const MatX& cost, const VecX& a, const VecX& b, double tau) {
  const Eigen::Index m = a.size();
  const Eigen::Index n = b.size();
  if (cost.rows() != m || cost.cols() != n) {
    throw InvalidInput("augment: cost matrix shape does not match the mass vectors");
  }
  AugmentedProblem out;
  out.cost = MatX::Constant(m + 1, n + 1, tau);
  out.cost.topLeftCorner(m, n) = cost;
  out.cost(m, n) = 0.0;
  out.a_hat.resize(m + 1);
  out.a_hat << a, b.sum();
  out.b_hat.resize(n + 1);
  out.b_hat << b, a.sum();
  return out;
}

TransportPlan sinkhorn(const MatX& cost, const VecX& a_hat, const VecX& b_hat,
                       const OTConfig& cfg) {
  const Eigen::Index rows = a_hat.size();
  const Eigen::Index cols = b_hat.size();
  if (cost.rows() != rows || cost.cols() != cols) {
    throw InvalidInput("sinkhorn: cost matrix shape does not match the marginals");
  }
  if (!(cfg.epsilon > 0.0)) throw InvalidInput("sinkhorn: epsilon must be positive");
  if ((a_hat.array() < 0.0).any() || (b_hat.array() < 0.0).any()) {
    throw InvalidInput("sinkhorn: marginals must be non-negative");
  }
  const double mass = a_hat.sum();
  if (!(mass > 0.0) || std::abs(mass - b_hat.sum()) > 1e-12 * mass) {
    throw InvalidInput("sinkhorn: marginals must be balanced with positive mass");
  }

  const RowMajor kernel = -cost / cfg.epsilon;
  const RowMajor kernel_t = kernel.transpose();
  const VecX log_a = safe_log(a_hat);
  const VecX log_b = safe_log(b_hat);
  VecX u = VecX::Zero(rows);
  VecX v = VecX::Zero(cols);
  VecX row_lse(rows);
  const double target = cfg.tol * mass;

  TransportPlan out;
  for (int it = 0; it < cfg.max_iters; ++it) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      row_lse[i] = log_sum_exp(kernel.row(i).data(), v.data(), cols);
    }
    if (it > 0) {
      // Columns are exact after the last v update, so only rows can violate.
      double row_err = 0.0;
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double s = u[i] == kNegInf ? 0.0 : std::exp(u[i] + row_lse[i]);
        row_err = std::max(row_err, std::abs(s - a_hat[i]));
      }
      if (row_err <= target) break;
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      u[i] = log_a[i] == kNegInf ? kNegInf : log_a[i] - row_lse[i];
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double lse = log_sum_exp(kernel_t.row(j).data(), u.data(), rows);
      v[j] = log_b[j] == kNegInf ? kNegInf : log_b[j] - lse;
    }
    out.iterations_used = it + 1;
  }

  out.plan.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double e = kernel(i, j) + u[i] + v[j];
      out.plan(i, j) = e == kNegInf ? 0.0 : std::exp(e);
    }
  }
  const double row_err = (out.plan.rowwise().sum() - a_hat).cwiseAbs().maxCoeff();
  const double col_err = (out.plan.colwise().sum().transpose() - b_hat).cwiseAbs().maxCoeff();
  out.marginal_error = std::max(row_err, col_err);
  out.converged = out.marginal_error <= target;
  out.a_hat = a_hat;
  out.b_hat = b_hat;
  return out;
}

}  // namespace otpl
