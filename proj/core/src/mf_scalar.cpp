#include <algorithm>
#include <chrono>
#include <cmath>

#include "sbl/bpmf.hpp"
#include "sbl/errors.hpp"
#include "sbl/mf_baselines.hpp"

namespace sbl {

MfScalarSolver::MfScalarSolver(const Problem& problem, SolverOptions options)
    : problem_(problem), options_(std::move(options)) {
  if (problem.y.size() != problem.phi.rows()) {
    throw ContractViolation("MfScalarSolver: y length does not match phi");
  }
  const Eigen::Index l_cols = problem.phi.cols();
  col_norm2_ = problem.phi.colwise().squaredNorm().transpose();
  lambda_ = options_.start_lambda(problem);
  gamma_ = RVector::Constant(l_cols, options_.start_gamma());
  if (!(lambda_ > 0.0) || !(gamma_.minCoeff() > 0.0)) {
    throw ContractViolation("MfScalarSolver: hyperparameters must be positive");
  }
  mean_ = CVector::Zero(l_cols);
  var_ = gamma_.cwiseInverse();
  residual_ = problem.y;
}

void MfScalarSolver::iterate() {
  const CMatrix& phi = problem_.phi;
  for (Eigen::Index l = 0; l < phi.cols(); ++l) {
    var_(l) = 1.0 / (lambda_ * col_norm2_(l) + gamma_(l));
    // phi_l^H (residual + phi_l mu_l) without materializing the sum.
    const Complex corr = phi.col(l).dot(residual_) + col_norm2_(l) * mean_(l);
    const Complex updated = var_(l) * lambda_ * corr;
    const Complex delta = updated - mean_(l);
    if (delta != Complex{}) residual_ -= delta * phi.col(l);
    mean_(l) = updated;
  }

  if (!options_.fixed_gamma) {
    for (Eigen::Index l = 0; l < phi.cols(); ++l) {
      gamma_(l) = update_gamma(GaussianMsg::from_moments(mean_(l), var_(l)), options_.epsilon,
                               options_.eta);
    }
  }
  if (!options_.fixed_lambda) {
    const double denom = residual_.squaredNorm() + col_norm2_.dot(var_);
    lambda_ = denom > 0.0 ? std::clamp(static_cast<double>(problem_.y.size()) / denom,
                                       kLambdaMin, kLambdaMax)
                          : kLambdaMax;
  }
}

IterationTrace run_mf_scalar(const Problem& problem, const SolverOptions& options) {
  IterationTrace trace;
  trace.algorithm = std::string(algorithm_name(Algorithm::kMfScalar));
  MfScalarSolver solver(problem, options);
  CVector previous = solver.mean();
  for (int t = 0; t < options.iterations; ++t) {
    const auto start = std::chrono::steady_clock::now();
    solver.iterate();
    const double ms =
        options.record_wall_time
            ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                  .count()
            : 0.0;
    record_iteration(trace, problem, solver.mean(), solver.lambda_hat(), ms);
    if (options.early_stop_tol > 0.0) {
      if ((solver.mean() - previous).cwiseAbs().maxCoeff() < options.early_stop_tol) break;
      previous = solver.mean();
    }
  }
  trace.alpha_estimate = solver.mean();
  return trace;
}

IterationTrace run_mf_scalar(const Problem& problem, const RunConfig& cfg) {
  cfg.validate();
  return run_mf_scalar(problem, SolverOptions::from_config(cfg));
}

}  // namespace sbl
