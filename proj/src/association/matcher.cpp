#include "otpl/association/matcher.hpp"

#include <algorithm>
#include <numeric>

#include "otpl/common/errors.hpp"

namespace otpl {

VecX compute_masses(std::span<const LineSegment2D> segments) {
  VecX out(static_cast<Eigen::Index>(segments.size()));
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = (segments[i].start() - segments[i].end()).norm();
  }
  return out;
}

MatX descriptor_cost(std::span<const LineDescriptor> a, std::span<const LineDescriptor> b) {
  MatX cost(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (a[i].vector.size() != b[j].vector.size()) {
        throw InvalidInput("descriptor_cost: descriptor dimensions differ");
      }
      cost(i, j) = std::clamp(1.0 - a[i].vector.dot(b[j].vector), 0.0, 2.0);
    }
  }
  return cost;
}

MatX confidence(const TransportPlan& plan, const VecX& a, double eta) {
  const Eigen::Index m = a.size();
  const Eigen::Index n = plan.plan.cols() - 1;
  if (plan.plan.rows() != m + 1 || n < 0) {
    throw InvalidInput("confidence: plan shape does not match the mass vector");
  }
  MatX t(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    t.row(i) = plan.plan.row(i).head(n) / (a[i] + eta);
  }
  return t;
}

MatchSet mutual_best(const MatX& conf, double delta) {
  const Eigen::Index m = conf.rows();
  const Eigen::Index n = conf.cols();
  std::vector<Eigen::Index> row_best(m, -1);
  std::vector<Eigen::Index> col_best(n, -1);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (row_best[i] < 0 || conf(i, j) > conf(i, row_best[i])) row_best[i] = j;
      if (col_best[j] < 0 || conf(i, j) > conf(col_best[j], j)) col_best[j] = i;
    }
  }
  MatchSet out;
  std::vector<bool> used_b(n, false);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = row_best[i];
    if (j >= 0 && col_best[j] == i && conf(i, j) > delta) {
      out.pairs.push_back({static_cast<int>(i), static_cast<int>(j), conf(i, j)});
      used_b[j] = true;
    } else {
      out.unmatched_a.push_back(static_cast<int>(i));
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!used_b[j]) out.unmatched_b.push_back(static_cast<int>(j));
  }
  return out;
}

MatchSet associate_lines(std::span<const LineSegment2D> segs_a,
                         std::span<const LineSegment2D> segs_b,
                         std::span<const LineDescriptor> descs_a,
                         std::span<const LineDescriptor> descs_b, const OTConfig& cfg) {
  if (segs_a.size() != descs_a.size() || segs_b.size() != descs_b.size()) {
    throw InvalidInput("associate_lines: descriptor lists must parallel the segment lists");
  }
  cfg.validate();

  std::vector<int> keep_a;
  std::vector<int> keep_b;
  for (std::size_t i = 0; i < segs_a.size(); ++i) {
    if (segs_a[i].length() >= 1.0) keep_a.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < segs_b.size(); ++j) {
    if (segs_b[j].length() >= 1.0) keep_b.push_back(static_cast<int>(j));
  }

  MatchSet out;
  if (!keep_a.empty() && !keep_b.empty()) {
    std::vector<LineSegment2D> sa;
    std::vector<LineSegment2D> sb;
    std::vector<LineDescriptor> da;
    std::vector<LineDescriptor> db;
    for (int i : keep_a) {
      sa.push_back(segs_a[i]);
      da.push_back(descs_a[i]);
    }
    for (int j : keep_b) {
      sb.push_back(segs_b[j]);
      db.push_back(descs_b[j]);
    }
    const VecX a = compute_masses(sa);
    const VecX b = compute_masses(sb);
    const AugmentedProblem problem = augment(descriptor_cost(da, db), a, b, cfg.tau);
    const TransportPlan plan = sinkhorn(problem.cost, problem.a_hat, problem.b_hat, cfg);
    const MatchSet local = mutual_best(confidence(plan, a, cfg.eta), cfg.delta);
    for (const Match& p : local.pairs) out.pairs.push_back({keep_a[p.i], keep_b[p.j], p.confidence});
    if (!plan.converged) {
      out.converged = false;
      out.warning = "transport solver stopped at max_iters with marginal error " +
                    std::to_string(plan.marginal_error);
    }
  }

  std::vector<bool> hit_a(segs_a.size(), false);
  std::vector<bool> hit_b(segs_b.size(), false);
  for (const Match& p : out.pairs) {
    hit_a[p.i] = true;
    hit_b[p.j] = true;
  }
  for (std::size_t i = 0; i < segs_a.size(); ++i) {
    if (!hit_a[i]) out.unmatched_a.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < segs_b.size(); ++j) {
    if (!hit_b[j]) out.unmatched_b.push_back(static_cast<int>(j));
  }
  return out;
}

MatchSet nearest_neighbor_match(std::span<const LineDescriptor> descs_a,
                                std::span<const LineDescriptor> descs_b) {
  struct Candidate {
    double similarity;
    int i;
    int j;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(descs_a.size() * descs_b.size());
  for (std::size_t i = 0; i < descs_a.size(); ++i) {
    for (std::size_t j = 0; j < descs_b.size(); ++j) {
      candidates.push_back(
          {descs_a[i].vector.dot(descs_b[j].vector), static_cast<int>(i), static_cast<int>(j)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) { return x.similarity > y.similarity; });

  std::vector<bool> used_a(descs_a.size(), false);
  std::vector<bool> used_b(descs_b.size(), false);
  MatchSet out;
  for (const Candidate& c : candidates) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = true;
    used_b[c.j] = true;
    out.pairs.push_back({c.i, c.j, c.similarity});
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const Match& x, const Match& y) { return x.i < y.i; });
  for (std::size_t i = 0; i < descs_a.size(); ++i) {
    if (!used_a[i]) out.unmatched_a.push_back(static_cast<int>(i));
  }
  for (std::size_t j = 0; j < descs_b.size(); ++j) {
    if (!used_b[j]) out.unmatched_b.push_back(static_cast<int>(j));
  }
  return out;
}

}  // namespace otpl
