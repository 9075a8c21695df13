#pragma once

#include "sbl/bpmf.hpp"

namespace sbl {

/// Scaled residuals s_n = (y_n - p_n) / (1/lambda + nu_p_n). s_prev is the
/// value from the previous iteration and feeds the correction term of p.
struct ResidualState {
  CVector s;
  CVector s_prev;
};

struct QEstimate {
  CVector mean;
  RVector var;  // +inf for a zero column
};

struct PEstimate {
  CVector mean;
  RVector var;
};

/// Floor applied to 1/lambda + nu_p wherever it is a denominator.
inline constexpr double kDenominatorFloor = 1e-15;

/// nu_q_l = (sum_n |phi_nl|^2 / (1/lambda + nu_p_n))^-1,
/// q_l = alpha_hat_l + nu_q_l sum_n conj(phi_nl) s_n.
/// Uses state.alpha_mean, state.p_var and state.lambda_hat.
QEstimate approx_q(const SolverState& state, const CVector& s, const Problem& problem,
                   const RMatrix& phi_abs2);
QEstimate approx_q(const SolverState& state, const CVector& s, const Problem& problem);

/// Elementwise (y - p_mean) / max(1/lambda + p_var, kDenominatorFloor).
CVector compute_s(const CVector& y, const CVector& p_mean, const RVector& p_var,
                  double lambda_hat);

/// nu_p_n = sum_l |phi_nl|^2 nu_alpha_l, p_n = phi_n alpha_hat - s_prev_n nu_p_n.
/// Uses state.alpha_mean and state.alpha_var.
PEstimate approx_p(const SolverState& state, const Problem& problem, const CVector& s_prev,
                   const RMatrix& phi_abs2);
PEstimate approx_p(const SolverState& state, const Problem& problem, const CVector& s_prev);

/// Approximate solver: O(M + L) messages per iteration instead of O(ML).
class AbpmfSolver {
 public:
  AbpmfSolver(const Problem& problem, SolverOptions options);

  void iterate();

  const SolverState& state() const { return state_; }
  const ResidualState& residual() const { return residual_; }
  int iterations_done() const { return iterations_; }

 private:
  void refresh_beliefs();

  const Problem& problem_;
  SolverOptions options_;
  RMatrix phi_abs2_;
  SolverState state_;
  ResidualState residual_;
  int iterations_ = 0;
};

IterationTrace run_abpmf(const Problem& problem, const RunConfig& cfg);
IterationTrace run_abpmf(const Problem& problem, const SolverOptions& options);

}  // namespace sbl
