#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "sbl/gaussian.hpp"

namespace sbl {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Experiment parameters. Defaults are the reference setup: a 100x200 i.i.d.
/// CN(0,1) dictionary, 26 nonzeros, 14 dB, 20 iterations, 200 trials.
struct RunConfig {
  int m_rows = 100;
  int l_cols = 200;
  int k_sparsity = 26;
  double snr_db = 14.0;
  int iterations = 20;
  int trials = 200;
  std::uint64_t seed = 1;
  // Gamma hyperprior Ga(gamma; epsilon, eta) on each coefficient precision.
  double epsilon = 1e-10;
  double eta = 1e-10;
  // Stop once max |alpha_hat change| drops below this; 0 disables.
  double early_stop_tol = 0.0;
  // Damping on the approximate solver's residual and nu_p updates; 1 = off.
  double damping = 1.0;
  // Worker threads for Monte Carlo trials; 0 picks hardware concurrency.
  int threads = 0;
  // When false every wall_ms is 0 so repeated runs give identical output.
  bool record_wall_time = true;

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;
};

/// y = phi * alpha_true + w, w ~ CN(0, 1/lambda_true I).
struct Problem {
  CMatrix phi;
  CVector y;
  CVector alpha_true;
  // NaN when unknown (problems loaded from file do not carry it).
  double lambda_true = 1.0;
  int m_rows = 0;
  int l_cols = 0;
  int k_sparsity = 0;
  std::uint64_t seed = 0;
};

/// Per-trial RNG stream keyed on (cfg.seed, trial_index); the same pair always
/// yields a bit-identical problem. K = 0 gives pure noise at precision
/// 10^(snr/10).
Problem generate_problem(const RunConfig& cfg, std::uint64_t trial_index);

/// lambda = 10^(snr_db/10) / k: with unit-variance dictionary entries and
/// coefficients, the per-measurement signal power is k.
double snr_to_lambda(double snr_db, int k);

/// Reported in place of -inf for exact recovery.
inline constexpr double kNmseFloorDb = -300.0;

/// 10 log10(||estimate - truth||^2 / ||truth||^2), floored at kNmseFloorDb.
/// Throws ContractViolation on a zero truth or mismatched lengths.
double nmse_db(const CVector& estimate, const CVector& truth);

/// ||estimate - truth||^2 / L.
double mse_abs(const CVector& estimate, const CVector& truth);

}  // namespace sbl
