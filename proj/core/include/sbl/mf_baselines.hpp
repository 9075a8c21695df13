#pragma once

#include "sbl/problem.hpp"
#include "sbl/solver.hpp"

namespace sbl {

/// Gaussian posterior covariance of the vector-form solver; L x L Hermitian.
struct PosteriorCovariance {
  CMatrix sigma;
};

/// Vector-form mean field. Each iteration forms
///   Sigma = (lambda Phi^H Phi + diag(gamma))^-1,  mu = lambda Sigma Phi^H y,
/// then refreshes gamma_l = (eps + 1) / (eta + |mu_l|^2 + Sigma_ll) and
///   lambda = M / (||y - Phi mu||^2 + tr(Phi Sigma Phi^H)).
/// O(L^3) per iteration.
class MfVectorSolver {
 public:
  MfVectorSolver(const Problem& problem, SolverOptions options);

  void iterate();

  const CVector& mean() const { return mean_; }
  const PosteriorCovariance& covariance() const { return covariance_; }
  const RVector& gamma_hat() const { return gamma_; }
  double lambda_hat() const { return lambda_; }
  /// Number of factorizations that needed diagonal regularization.
  int regularized_count() const { return regularized_; }

 private:
  const Problem& problem_;
  SolverOptions options_;
  CMatrix gram_;  // Phi^H Phi
  CVector phi_h_y_;
  CVector mean_;
  PosteriorCovariance covariance_;
  RVector gamma_;
  double lambda_ = 1.0;
  int regularized_ = 0;
};

/// Scalar-form mean field: one in-order coordinate sweep per iteration,
///   nu_l = (lambda ||phi_l||^2 + gamma_l)^-1,
///   mu_l = nu_l lambda phi_l^H (y - sum_{l' != l} phi_l' mu_l'),
/// with gamma and lambda refreshed once after the sweep. The residual
/// y - Phi mu is maintained incrementally so a sweep is O(ML).
class MfScalarSolver {
 public:
  MfScalarSolver(const Problem& problem, SolverOptions options);

  void iterate();

  const CVector& mean() const { return mean_; }
  const RVector& variance() const { return var_; }
  const RVector& gamma_hat() const { return gamma_; }
  double lambda_hat() const { return lambda_; }

 private:
  const Problem& problem_;
  SolverOptions options_;
  RVector col_norm2_;
  CVector residual_;  // y - Phi mu
  CVector mean_;
  RVector var_;
  RVector gamma_;
  double lambda_ = 1.0;
};

IterationTrace run_mf_vector(const Problem& problem, const RunConfig& cfg);
IterationTrace run_mf_vector(const Problem& problem, const SolverOptions& options);
IterationTrace run_mf_scalar(const Problem& problem, const RunConfig& cfg);
IterationTrace run_mf_scalar(const Problem& problem, const SolverOptions& options);

}  // namespace sbl
