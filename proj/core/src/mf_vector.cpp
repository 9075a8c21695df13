#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>

#include "sbl/bpmf.hpp"
#include "sbl/errors.hpp"
#include "sbl/mf_baselines.hpp"

namespace sbl {

MfVectorSolver::MfVectorSolver(const Problem& problem, SolverOptions options)
    : problem_(problem), options_(std::move(options)) {
  if (problem.y.size() != problem.phi.rows()) {
    throw ContractViolation("MfVectorSolver: y length does not match phi");
  }
  const Eigen::Index l_cols = problem.phi.cols();
  gram_ = problem.phi.adjoint() * problem.phi;
  phi_h_y_ = problem.phi.adjoint() * problem.y;
  lambda_ = options_.start_lambda(problem);
  gamma_ = RVector::Constant(l_cols, options_.start_gamma());
  if (!(lambda_ > 0.0) || !(gamma_.minCoeff() > 0.0)) {
    throw ContractViolation("MfVectorSolver: hyperparameters must be positive");
  }
  mean_ = CVector::Zero(l_cols);
  covariance_.sigma = gamma_.cwiseInverse().cast<Complex>().asDiagonal();
}

void MfVectorSolver::iterate() {
  const Eigen::Index l_cols = gram_.rows();
  CMatrix system = lambda_ * gram_;
  system.diagonal() += gamma_.cast<Complex>();

  Eigen::LLT<CMatrix> llt(system);
  if (llt.info() != Eigen::Success) {
    ++regularized_;
    std::cerr << "warning: mf-vector system not positive definite; adding 1e-12 to the diagonal\n";
    system.diagonal().array() += 1e-12;
    llt.compute(system);
    if (llt.info() != Eigen::Success) {
      throw NoInformation("mf-vector: posterior precision matrix is singular");
    }
  }
  covariance_.sigma = llt.solve(CMatrix::Identity(l_cols, l_cols));
  mean_ = lambda_ * (covariance_.sigma * phi_h_y_);

  if (!options_.fixed_gamma) {
    for (Eigen::Index l = 0; l < l_cols; ++l) {
      const GaussianMsg b = GaussianMsg::from_moments(mean_(l), covariance_.sigma(l, l).real());
      gamma_(l) = update_gamma(b, options_.epsilon, options_.eta);
    }
  }
  if (!options_.fixed_lambda) {
    const double residual = (problem_.y - problem_.phi * mean_).squaredNorm();
    // tr(Phi Sigma Phi^H) = tr(G Sigma) = sum_ij G_ij conj(Sigma_ij) for Hermitian Sigma.
    const double spread = (gram_.array() * covariance_.sigma.array().conjugate()).sum().real();
    const double denom = residual + spread;
    lambda_ = denom > 0.0 ? std::clamp(static_cast<double>(problem_.y.size()) / denom,
                                       kLambdaMin, kLambdaMax)
                          : kLambdaMax;
  }
}

IterationTrace run_mf_vector(const Problem& problem, const SolverOptions& options) {
  IterationTrace trace;
  trace.algorithm = std::string(algorithm_name(Algorithm::kMfVector));
  MfVectorSolver solver(problem, options);
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

IterationTrace run_mf_vector(const Problem& problem, const RunConfig& cfg) {
  cfg.validate();
  return run_mf_vector(problem, SolverOptions::from_config(cfg));
}

}  // namespace sbl
