#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "sbl/problem.hpp"
#include "sbl/solver.hpp"

namespace sbl {

enum class SweepAxis { kSnrDb, kK, kIteration };

/// "snr_db", "k", "iteration".
std::string_view axis_name(SweepAxis axis);

struct SweepPoint {
  Algorithm algorithm = Algorithm::kBpmf;
  double axis_value = 0.0;
  double mean_nmse_db = 0.0;    // mean of the per-trial NMSEs in dB
  double stderr_nmse_db = 0.0;  // standard error of that mean
  int trials = 0;
  // The metric is undefined at this point (zero truth, K = 0).
  bool skipped = false;
};

struct TrialRecord {
  Algorithm algorithm = Algorithm::kBpmf;
  double axis_value = 0.0;
  int trial = 0;
  IterationTrace trace;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kSnrDb;
  std::vector<Algorithm> algorithms;
  std::vector<double> axis_values;
  int trials = 0;
  std::vector<SweepPoint> points;    // ordered (algorithm, axis value)
  std::vector<TrialRecord> records;  // ordered (algorithm, axis value, trial)

  /// Throws ContractViolation when absent.
  const SweepPoint& point(Algorithm alg, double axis_value) const;
};

IterationTrace run_algorithm(Algorithm alg, const Problem& problem, const SolverOptions& options);

/// Final-iteration NMSE over cfg.trials paired trials per SNR: trial i at
/// every SNR and for every algorithm uses generate_problem(cfg', i).
SweepResult sweep_snr(const RunConfig& cfg, std::span<const double> snr_list,
                      std::span<const Algorithm> algorithms = kAllAlgorithms);

/// Same as sweep_snr with the sparsity varying at cfg.snr_db.
SweepResult sweep_k(const RunConfig& cfg, std::span<const int> k_list,
                    std::span<const Algorithm> algorithms = kAllAlgorithms);

/// Mean NMSE after each iteration at cfg.snr_db and cfg.k_sparsity; one
/// point per (algorithm, iteration).
SweepResult trace_convergence(const RunConfig& cfg,
                              std::span<const Algorithm> algorithms = kAllAlgorithms);

/// Header `algorithm,axis,axis_value,trial,iteration,nmse_db,mse_abs,lambda_hat,wall_ms`
/// followed by one row per record and iteration, floats at 17 significant
/// digits.
void emit_csv(const SweepResult& result, std::ostream& out);
/// Throws IoError when the file cannot be written.
void emit_csv(const SweepResult& result, const std::filesystem::path& path);

inline constexpr std::string_view kCsvHeader =
    "algorithm,axis,axis_value,trial,iteration,nmse_db,mse_abs,lambda_hat,wall_ms";

/// One CSV row (no trailing newline).
std::string csv_row(std::string_view algorithm, std::string_view axis, double axis_value,
                    int trial, const TraceRow& row);

}  // namespace sbl
