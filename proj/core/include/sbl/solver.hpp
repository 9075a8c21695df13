#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sbl/problem.hpp"

namespace sbl {

enum class Algorithm { kBpmf, kAbpmf, kMfVector, kMfScalar };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::kBpmf, Algorithm::kAbpmf,
                                               Algorithm::kMfVector, Algorithm::kMfScalar};

/// "bpmf", "abpmf", "mf-vector", "mf-scalar".
std::string_view algorithm_name(Algorithm alg);
/// Throws ConfigError for an unknown name.
Algorithm parse_algorithm(std::string_view name);

// Clamp ranges. gamma at kGammaMax marks a pruned coefficient.
inline constexpr double kGammaMin = 1e-12;
inline constexpr double kGammaMax = 1e12;
inline constexpr double kLambdaMin = 1e-12;
inline constexpr double kLambdaMax = 1e12;

struct SolverOptions {
  int iterations = 20;
  double epsilon = 1e-10;
  double eta = 1e-10;
  double early_stop_tol = 0.0;
  double damping = 1.0;
  bool record_wall_time = true;
  // Hold the hyperparameters at these values instead of learning them.
  std::optional<double> fixed_lambda;
  std::optional<double> fixed_gamma;
  // Starting values when learned; defaults are M/||y||^2 and 1.
  std::optional<double> initial_lambda;
  std::optional<double> initial_gamma;

  double start_lambda(const Problem& problem) const;
  double start_gamma() const;

  static SolverOptions from_config(const RunConfig& cfg);
};

/// Per-iteration quantities shared by the solvers. A FLAT variance is +inf.
struct SolverState {
  CVector alpha_mean;  // belief means alpha_hat_l
  RVector alpha_var;   // belief variances nu_alpha_l
  RVector gamma_hat;   // prior precisions
  CVector q_mean;      // product of the factor-to-alpha messages
  RVector q_var;
  CVector p_mean;      // message f_delta_n -> h_n
  RVector p_var;
  CVector h_mean;      // belief of h_n
  RVector h_var;
  double lambda_hat = 1.0;
};

struct TraceRow {
  int iteration = 0;
  double nmse_db = 0.0;  // NaN when the truth is zero or unknown
  double mse_abs = 0.0;
  double lambda_hat = 0.0;
  double wall_ms = 0.0;
};

struct IterationTrace {
  std::string algorithm;
  int trial = 0;
  std::vector<TraceRow> rows;  // iteration indices 1, 2, ...
  CVector alpha_estimate;

  /// nmse_db of the last row; NaN for an empty trace.
  double final_nmse_db() const;
};

/// Appends the next row; NMSE is NaN when the problem's truth is all zero.
void record_iteration(IterationTrace& trace, const Problem& problem, const CVector& alpha,
                      double lambda_hat, double wall_ms);

/// Initial noise precision M / ||y||^2. Throws ContractViolation for y = 0.
double default_initial_lambda(const Problem& problem);

}  // namespace sbl
