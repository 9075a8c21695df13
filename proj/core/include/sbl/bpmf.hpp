#pragma once

#include <span>
#include <utility>

#include <Eigen/Dense>

#include "sbl/gaussian.hpp"
#include "sbl/problem.hpp"
#include "sbl/solver.hpp"

namespace sbl {

/// Edge messages of the bipartite subgraph between the coefficients alpha_l and
/// the hard-constraint factors f_delta_n. Every array is M x L and indexed
/// (n, l). A FLAT message has variance +inf and mean 0.
struct EdgeMessageGrid {
  CMatrix a_to_f_mean;  // alpha_l -> f_delta_n
  RMatrix a_to_f_var;
  CMatrix f_to_a_mean;  // f_delta_n -> alpha_l
  RMatrix f_to_a_var;
  // Edges with a vanishing dictionary entry are absent from the graph.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active;

  int rows() const { return static_cast<int>(a_to_f_mean.rows()); }
  int cols() const { return static_cast<int>(a_to_f_mean.cols()); }

  GaussianMsg a_to_f(int n, int l) const;
  GaussianMsg f_to_a(int n, int l) const;
  void set_a_to_f(int n, int l, const GaussianMsg& m);
  void set_f_to_a(int n, int l, const GaussianMsg& m);
};

/// |phi_nl|^2 below this fraction of the row maximum removes the edge.
inline constexpr double kDegenerateEdgeRatio = 1e-24;

/// Active-edge mask for a dictionary.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active_edges(const CMatrix& phi);

/// Unit-variance zero-mean alpha -> f messages, gamma = 1, lambda = M/||y||^2,
/// p from the initial edges. Throws ContractViolation when y = 0.
std::pair<SolverState, EdgeMessageGrid> init_state(const Problem& problem,
                                                   const SolverOptions& options);

/// CN(h_n; y_n, 1/lambda_hat).
GaussianMsg msg_obs_to_h(Complex y_n, double lambda_hat);

/// Refreshes every f_delta_n -> alpha_l message from the current alpha -> f
/// messages, p and lambda_hat. Inactive edges, FLAT rows and non-positive
/// variances produce FLAT.
void msg_delta_to_alpha(const SolverState& state, EdgeMessageGrid& grid, const Problem& problem);

/// Product of the f -> alpha messages into column l. Throws NoInformation
/// when all of them are FLAT.
GaussianMsg combine_q(const EdgeMessageGrid& grid, int l);

/// q * CN(alpha; 0, 1/gamma). A FLAT q leaves the prior alone.
GaussianMsg update_alpha_belief(const GaussianMsg& q, double gamma_hat);

/// Mean of the Gamma belief on gamma_l: (epsilon + 1) / (eta + <|alpha_l|^2>),
/// clamped to [kGammaMin, kGammaMax].
double update_gamma(const GaussianMsg& alpha_belief, double epsilon, double eta);

/// Refreshes every alpha_l -> f_delta_n message as belief / incoming message.
void msg_alpha_to_delta(const SolverState& state, EdgeMessageGrid& grid);

/// CN(h_n; p_n, nu_p_n) from the alpha -> f messages of row n. FLAT if any
/// active edge of the row is FLAT; a row without active edges is the point
/// mass at zero.
GaussianMsg msg_delta_to_h(const EdgeMessageGrid& grid, const Problem& problem, int n);

/// CN(y_n, 1/lambda) * p.
GaussianMsg update_h_belief(Complex y_n, double lambda_hat, const GaussianMsg& p);

/// M / sum_n <|y_n - h_n|^2>, clamped to [kLambdaMin, kLambdaMax].
double update_lambda(const CVector& y, std::span<const GaussianMsg> h_beliefs);
double update_lambda(const CVector& y, const CVector& h_mean, const RVector& h_var);

// Whole-vector forms of the belief updates above, used inside the solvers.
// Same formulas, same clamps; FLAT entries (+inf variance) are handled.
void update_alpha_beliefs(const CVector& q_mean, const RVector& q_var, const RVector& gamma_hat,
                          CVector& alpha_mean, RVector& alpha_var);
void update_gammas(const CVector& alpha_mean, const RVector& alpha_var, double epsilon,
                   double eta, RVector& gamma_hat);
void update_h_beliefs(const CVector& y, double lambda_hat, const CVector& p_mean,
                      const RVector& p_var, CVector& h_mean, RVector& h_var);

/// Exact combined BP/MF solver over the full M x L edge grid.
class BpmfSolver {
 public:
  BpmfSolver(const Problem& problem, SolverOptions options);

  /// One pass of the schedule: f->alpha edges, q, belief, gamma, belief
  /// again, alpha->f edges, p, h belief, lambda.
  void iterate();

  const SolverState& state() const { return state_; }
  const EdgeMessageGrid& grid() const { return grid_; }
  const Problem& problem() const { return problem_; }
  int iterations_done() const { return iterations_; }

 private:
  void refresh_beliefs();

  const Problem& problem_;
  SolverOptions options_;
  SolverState state_;
  EdgeMessageGrid grid_;
  int iterations_ = 0;
};

IterationTrace run_bpmf(const Problem& problem, const RunConfig& cfg);
IterationTrace run_bpmf(const Problem& problem, const SolverOptions& options);

}  // namespace sbl
