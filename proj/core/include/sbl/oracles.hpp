#pragma once

#include <vector>

#include "sbl/bpmf.hpp"
#include "sbl/problem.hpp"
#include "sbl/solver.hpp"

namespace sbl {

/// Unapproximated message quantities on one exact-solver state.
struct ExactEdgeResult {
  CVector q_mean;  // product of the freshly recomputed f -> alpha messages
  RVector q_var;
  CVector p_mean;  // sums over the grid's alpha -> f messages
  RVector p_var;
};

/// Evaluates the full edge-grid recursions without touching solver code:
/// p from grid.a_to_f, then f -> alpha messages from that p and
/// state.lambda_hat, then their per-column product q.
ExactEdgeResult exact_edge_oracle(const SolverState& state, const EdgeMessageGrid& grid,
                                  const Problem& problem);

/// Genie least squares restricted to the true support of alpha_true.
/// Throws ContractViolation when the support is larger than M.
CVector support_oracle(const Problem& problem);

struct ConsistencyReport {
  double max_belief_deviation = 0.0;  // q * prior vs stored belief, over columns
  double max_edge_deviation = 0.0;    // a_to_f * f_to_a vs belief, over edges
  int checked_columns = 0;
  int skipped_columns = 0;  // columns whose incoming messages are all FLAT
  int checked_edges = 0;

  double max_deviation() const {
    return max_belief_deviation > max_edge_deviation ? max_belief_deviation
                                                     : max_edge_deviation;
  }
};

/// Relative deviation of two Gaussians: max(|dv|/v, |dmu|/(|mu| + sqrt(v))).
double gaussian_deviation(Complex mean_a, double var_a, Complex mean_b, double var_b);

/// Checks that the stored belief equals q times the prior for every column
/// and that, on every non-FLAT edge, the outgoing and incoming messages
/// multiply back to the belief. Valid on a state at the end of an iteration.
ConsistencyReport belief_consistency_check(const SolverState& state, const EdgeMessageGrid& grid);

/// ||a - b|| / ||b||, or 0 when both are zero.
double relative_gap(const CVector& a, const CVector& b);
double relative_gap(const RVector& a, const RVector& b);

/// Gaps between the approximate q/p updates and the exact edge-grid values,
/// each measured with relative_gap.
struct ApproximationGap {
  double q_mean = 0.0;
  double q_var = 0.0;
  double p_mean = 0.0;
  double p_var = 0.0;

  double max() const;
};

/// Runs the exact solver for warmup iterations on the problem, then compares
/// approx_p (with the residual implied by the previous iteration's p) with the
/// grid's p, and approx_q with the q the exact solver would form next.
ApproximationGap approximation_gap(const Problem& problem, const SolverOptions& options,
                                   int warmup_iterations);

}  // namespace sbl
