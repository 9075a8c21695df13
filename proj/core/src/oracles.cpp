#include "sbl/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sbl/abpmf.hpp"
#include "sbl/errors.hpp"

namespace sbl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Keeps only the entries where both variances are finite.
template <typename Vec>
std::pair<Vec, Vec> finite_pairs(const Vec& a, const Vec& b, const RVector& var_a,
                                 const RVector& var_b) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::isfinite(var_a(i)) && std::isfinite(var_b(i))) keep.push_back(i);
  }
  Vec out_a(static_cast<Eigen::Index>(keep.size()));
  Vec out_b(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out_a(static_cast<Eigen::Index>(k)) = a(keep[k]);
    out_b(static_cast<Eigen::Index>(k)) = b(keep[k]);
  }
  return {out_a, out_b};
}

}  // namespace

ExactEdgeResult exact_edge_oracle(const SolverState& state, const EdgeMessageGrid& grid,
                                  const Problem& problem) {
  const Eigen::Index m = problem.phi.rows();
  const Eigen::Index l_cols = problem.phi.cols();
  ExactEdgeResult r;

  r.p_mean = CVector::Zero(m);
  r.p_var = RVector::Zero(m);
  for (Eigen::Index n = 0; n < m; ++n) {
    for (Eigen::Index l = 0; l < l_cols; ++l) {
      if (!grid.active(n, l)) continue;
      r.p_mean(n) += problem.phi(n, l) * grid.a_to_f_mean(n, l);
      r.p_var(n) += std::norm(problem.phi(n, l)) * grid.a_to_f_var(n, l);
    }
  }

  const double noise_var = 1.0 / state.lambda_hat;
  r.q_mean = CVector::Zero(l_cols);
  r.q_var = RVector::Constant(l_cols, kInf);
  for (Eigen::Index l = 0; l < l_cols; ++l) {
    double precision = 0.0;
    Complex weighted{0.0, 0.0};
    for (Eigen::Index n = 0; n < m; ++n) {
      if (!grid.active(n, l) || !std::isfinite(r.p_var(n))) continue;
      const double phi2 = std::norm(problem.phi(n, l));
      const double base = noise_var + r.p_var(n);
      const double numer = base - phi2 * grid.a_to_f_var(n, l);
      if (!(numer > 4.0 * kEps * base)) continue;
      const Complex mean =
          (problem.y(n) - r.p_mean(n) + problem.phi(n, l) * grid.a_to_f_mean(n, l)) /
          problem.phi(n, l);
      const double edge_precision = phi2 / numer;
      precision += edge_precision;
      weighted += edge_precision * mean;
    }
    if (precision > 0.0) {
      r.q_var(l) = 1.0 / precision;
      r.q_mean(l) = weighted / precision;
    }
  }
  return r;
}

CVector support_oracle(const Problem& problem) {
  std::vector<Eigen::Index> support;
  for (Eigen::Index l = 0; l < problem.alpha_true.size(); ++l) {
    if (problem.alpha_true(l) != Complex{}) support.push_back(l);
  }
  const auto k = static_cast<Eigen::Index>(support.size());
  if (k > problem.phi.rows()) {
    throw ContractViolation("support_oracle: support larger than the number of measurements");
  }
  CVector estimate = CVector::Zero(problem.phi.cols());
  if (k == 0) return estimate;

  CMatrix sub(problem.phi.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) sub.col(j) = problem.phi.col(support[j]);
  const CVector coeffs = sub.colPivHouseholderQr().solve(problem.y);
  for (Eigen::Index j = 0; j < k; ++j) estimate(support[j]) = coeffs(j);
  return estimate;
}

double gaussian_deviation(Complex mean_a, double var_a, Complex mean_b, double var_b) {
  const double var_dev = std::abs(var_a - var_b) / var_b;
  const double mean_dev = std::abs(mean_a - mean_b) / (std::abs(mean_b) + std::sqrt(var_b));
  return std::max(var_dev, mean_dev);
}

ConsistencyReport belief_consistency_check(const SolverState& state,
                                           const EdgeMessageGrid& grid) {
  ConsistencyReport report;
  for (int l = 0; l < grid.cols(); ++l) {
    const double belief_var = state.alpha_var(l);
    const Complex belief_mean = state.alpha_mean(l);

    double q_prec = 0.0;
    Complex q_weighted{0.0, 0.0};
    for (int n = 0; n < grid.rows(); ++n) {
      const double v = grid.f_to_a_var(n, l);
      if (!std::isfinite(v)) continue;
      q_prec += 1.0 / v;
      q_weighted += grid.f_to_a_mean(n, l) / v;
    }
    if (q_prec == 0.0) {
      ++report.skipped_columns;
    } else {
      ++report.checked_columns;
      const double prec = q_prec + state.gamma_hat(l);
      report.max_belief_deviation =
          std::max(report.max_belief_deviation,
                   gaussian_deviation(q_weighted / prec, 1.0 / prec, belief_mean, belief_var));
    }

    for (int n = 0; n < grid.rows(); ++n) {
      if (!grid.active(n, l)) continue;
      const double va = grid.a_to_f_var(n, l);
      const double vf = grid.f_to_a_var(n, l);
      if (!std::isfinite(va)) continue;  // outgoing FLAT carries nothing to check
      double prec = 1.0 / va;
      Complex weighted = grid.a_to_f_mean(n, l) / va;
      if (std::isfinite(vf)) {
        prec += 1.0 / vf;
        weighted += grid.f_to_a_mean(n, l) / vf;
      }
      ++report.checked_edges;
      report.max_edge_deviation =
          std::max(report.max_edge_deviation,
                   gaussian_deviation(weighted / prec, 1.0 / prec, belief_mean, belief_var));
    }
  }
  return report;
}

double relative_gap(const CVector& a, const CVector& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  if (denom == 0.0) return diff == 0.0 ? 0.0 : kInf;
  return diff / denom;
}

double relative_gap(const RVector& a, const RVector& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  if (denom == 0.0) return diff == 0.0 ? 0.0 : kInf;
  return diff / denom;
}

double ApproximationGap::max() const { return std::max({q_mean, q_var, p_mean, p_var}); }

ApproximationGap approximation_gap(const Problem& problem, const SolverOptions& options,
                                   int warmup_iterations) {
  if (warmup_iterations < 1) throw ContractViolation("approximation_gap: need >= 1 iteration");
  BpmfSolver solver(problem, options);
  for (int t = 1; t < warmup_iterations; ++t) solver.iterate();

  const SolverState before = solver.state();
  const CVector s_prev = compute_s(problem.y, before.p_mean, before.p_var, before.lambda_hat);
  solver.iterate();
  const SolverState& state = solver.state();

  const ExactEdgeResult exact = exact_edge_oracle(state, solver.grid(), problem);
  const PEstimate p = approx_p(state, problem, s_prev);
  const CVector s = compute_s(problem.y, state.p_mean, state.p_var, state.lambda_hat);
  const QEstimate q = approx_q(state, s, problem);

  ApproximationGap gap;
  {
    auto [a, b] = finite_pairs<CVector>(p.mean, exact.p_mean, p.var, exact.p_var);
    gap.p_mean = relative_gap(a, b);
    auto [va, vb] = finite_pairs<RVector>(p.var, exact.p_var, p.var, exact.p_var);
    gap.p_var = relative_gap(va, vb);
  }
  {
    auto [a, b] = finite_pairs<CVector>(q.mean, exact.q_mean, q.var, exact.q_var);
    gap.q_mean = relative_gap(a, b);
    auto [va, vb] = finite_pairs<RVector>(q.var, exact.q_var, q.var, exact.q_var);
    gap.q_var = relative_gap(va, vb);
  }
  return gap;
}

}  // namespace sbl
