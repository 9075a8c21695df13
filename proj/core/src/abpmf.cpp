#include "sbl/abpmf.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "sbl/errors.hpp"

namespace sbl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RVector output_weights(const RVector& p_var, double lambda_hat) {
  return ((1.0 / lambda_hat) + p_var.array()).max(kDenominatorFloor).inverse().matrix();
}

}  // namespace

QEstimate approx_q(const SolverState& state, const CVector& s, const Problem& problem,
                   const RMatrix& phi_abs2) {
  if (!(state.lambda_hat > 0.0)) throw ContractViolation("approx_q: lambda must be positive");
  const RVector precision = phi_abs2.transpose() * output_weights(state.p_var, state.lambda_hat);
  const CVector correlation = problem.phi.adjoint() * s;
  QEstimate q;
  q.mean = state.alpha_mean;
  q.var = RVector::Constant(precision.size(), kInf);
  for (Eigen::Index l = 0; l < precision.size(); ++l) {
    if (!(precision(l) > 0.0)) continue;
    q.var(l) = 1.0 / precision(l);
    q.mean(l) += q.var(l) * correlation(l);
  }
  return q;
}

QEstimate approx_q(const SolverState& state, const CVector& s, const Problem& problem) {
  return approx_q(state, s, problem, problem.phi.cwiseAbs2());
}

CVector compute_s(const CVector& y, const CVector& p_mean, const RVector& p_var,
                  double lambda_hat) {
  if (!(lambda_hat > 0.0)) throw ContractViolation("compute_s: lambda must be positive");
  if (p_mean.size() != y.size() || p_var.size() != y.size()) {
    throw ContractViolation("compute_s: length mismatch");
  }
  return (y - p_mean).cwiseProduct(output_weights(p_var, lambda_hat).cast<Complex>());
}

PEstimate approx_p(const SolverState& state, const Problem& problem, const CVector& s_prev,
                   const RMatrix& phi_abs2) {
  PEstimate p;
  p.var = phi_abs2 * state.alpha_var;
  p.mean = problem.phi * state.alpha_mean - s_prev.cwiseProduct(p.var.cast<Complex>());
  return p;
}

PEstimate approx_p(const SolverState& state, const Problem& problem, const CVector& s_prev) {
  return approx_p(state, problem, s_prev, problem.phi.cwiseAbs2());
}

AbpmfSolver::AbpmfSolver(const Problem& problem, SolverOptions options)
    : problem_(problem), options_(std::move(options)), phi_abs2_(problem.phi.cwiseAbs2()) {
  const int m = static_cast<int>(problem.phi.rows());
  const int l_cols = static_cast<int>(problem.phi.cols());
  if (problem.y.size() != m) throw ContractViolation("AbpmfSolver: y length does not match phi");

  state_.lambda_hat = options_.start_lambda(problem);
  if (!(state_.lambda_hat > 0.0)) throw ContractViolation("AbpmfSolver: lambda must be positive");
  const double gamma0 = options_.start_gamma();
  if (!(gamma0 > 0.0)) throw ContractViolation("AbpmfSolver: gamma must be positive");

  state_.gamma_hat = RVector::Constant(l_cols, gamma0);
  state_.alpha_mean = CVector::Zero(l_cols);
  state_.alpha_var = RVector::Ones(l_cols);
  state_.q_mean = CVector::Zero(l_cols);
  state_.q_var = RVector::Constant(l_cols, kInf);
  // Same starting messages as the exact solver: p = phi * 0, nu_p = row power.
  state_.p_var = phi_abs2_ * state_.alpha_var;
  state_.p_mean = CVector::Zero(m);
  residual_.s_prev = CVector::Zero(m);
  residual_.s = compute_s(problem_.y, state_.p_mean, state_.p_var, state_.lambda_hat);
  update_h_beliefs(problem_.y, state_.lambda_hat, state_.p_mean, state_.p_var, state_.h_mean,
                   state_.h_var);
}

void AbpmfSolver::refresh_beliefs() {
  update_alpha_beliefs(state_.q_mean, state_.q_var, state_.gamma_hat, state_.alpha_mean,
                       state_.alpha_var);
}

void AbpmfSolver::iterate() {
  QEstimate q = approx_q(state_, residual_.s, problem_, phi_abs2_);
  state_.q_mean = std::move(q.mean);
  state_.q_var = std::move(q.var);

  refresh_beliefs();
  if (!options_.fixed_gamma) {
    update_gammas(state_.alpha_mean, state_.alpha_var, options_.epsilon, options_.eta,
                  state_.gamma_hat);
  }
  refresh_beliefs();

  const double rho = options_.damping;
  if (rho < 1.0) {
    state_.p_var = rho * (phi_abs2_ * state_.alpha_var) + (1.0 - rho) * state_.p_var;
    state_.p_mean = problem_.phi * state_.alpha_mean -
                    residual_.s.cwiseProduct(state_.p_var.cast<Complex>());
  } else {
    PEstimate p = approx_p(state_, problem_, residual_.s, phi_abs2_);
    state_.p_var = std::move(p.var);
    state_.p_mean = std::move(p.mean);
  }

  residual_.s_prev = residual_.s;
  residual_.s = compute_s(problem_.y, state_.p_mean, state_.p_var, state_.lambda_hat);
  if (rho < 1.0) residual_.s = rho * residual_.s + (1.0 - rho) * residual_.s_prev;

  update_h_beliefs(problem_.y, state_.lambda_hat, state_.p_mean, state_.p_var, state_.h_mean,
                   state_.h_var);
  if (!options_.fixed_lambda) {
    state_.lambda_hat = update_lambda(problem_.y, state_.h_mean, state_.h_var);
  }
  ++iterations_;
}

IterationTrace run_abpmf(const Problem& problem, const SolverOptions& options) {
  IterationTrace trace;
  trace.algorithm = std::string(algorithm_name(Algorithm::kAbpmf));
  AbpmfSolver solver(problem, options);
  CVector previous = solver.state().alpha_mean;
  for (int t = 0; t < options.iterations; ++t) {
    const auto start = std::chrono::steady_clock::now();
    solver.iterate();
    const double ms =
        options.record_wall_time
            ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                  .count()
            : 0.0;
    record_iteration(trace, problem, solver.state().alpha_mean, solver.state().lambda_hat, ms);
    if (options.early_stop_tol > 0.0) {
      const double change = (solver.state().alpha_mean - previous).cwiseAbs().maxCoeff();
      if (change < options.early_stop_tol) break;
      previous = solver.state().alpha_mean;
    }
  }
  trace.alpha_estimate = solver.state().alpha_mean;
  return trace;
}

IterationTrace run_abpmf(const Problem& problem, const RunConfig& cfg) {
  cfg.validate();
  return run_abpmf(problem, SolverOptions::from_config(cfg));
}

}  // namespace sbl
