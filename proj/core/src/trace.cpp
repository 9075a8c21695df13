#include <algorithm>
#include <cmath>
#include <limits>

#include "sbl/errors.hpp"
#include "sbl/solver.hpp"

namespace sbl {

std::string_view algorithm_name(Algorithm alg) {
  switch (alg) {
    case Algorithm::kBpmf:
      return "bpmf";
    case Algorithm::kAbpmf:
      return "abpmf";
    case Algorithm::kMfVector:
      return "mf-vector";
    case Algorithm::kMfScalar:
      return "mf-scalar";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm alg : kAllAlgorithms) {
    if (algorithm_name(alg) == name) return alg;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) +
                    "' (expected bpmf, abpmf, mf-vector or mf-scalar)");
}

SolverOptions SolverOptions::from_config(const RunConfig& cfg) {
  SolverOptions opt;
  opt.iterations = cfg.iterations;
  opt.epsilon = cfg.epsilon;
  opt.eta = cfg.eta;
  opt.early_stop_tol = cfg.early_stop_tol;
  opt.damping = cfg.damping;
  opt.record_wall_time = cfg.record_wall_time;
  return opt;
}

double SolverOptions::start_lambda(const Problem& problem) const {
  if (fixed_lambda) return *fixed_lambda;
  if (initial_lambda) return *initial_lambda;
  return default_initial_lambda(problem);
}

double SolverOptions::start_gamma() const { return fixed_gamma.value_or(initial_gamma.value_or(1.0)); }

double IterationTrace::final_nmse_db() const {
  return rows.empty() ? std::numeric_limits<double>::quiet_NaN() : rows.back().nmse_db;
}

void record_iteration(IterationTrace& trace, const Problem& problem, const CVector& alpha,
                      double lambda_hat, double wall_ms) {
  TraceRow row;
  row.iteration = static_cast<int>(trace.rows.size()) + 1;
  row.nmse_db = problem.alpha_true.squaredNorm() > 0.0 ? nmse_db(alpha, problem.alpha_true)
                                                       : std::numeric_limits<double>::quiet_NaN();
  row.mse_abs = mse_abs(alpha, problem.alpha_true);
  row.lambda_hat = lambda_hat;
  row.wall_ms = wall_ms;
  trace.rows.push_back(row);
}

double default_initial_lambda(const Problem& problem) {
  const double power = problem.y.squaredNorm();
  if (!(power > 0.0)) throw ContractViolation("initial lambda undefined: y is the zero vector");
  return std::clamp(static_cast<double>(problem.y.size()) / power, kLambdaMin, kLambdaMax);
}

}  // namespace sbl
