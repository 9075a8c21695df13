#include "sbl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "sbl/abpmf.hpp"
#include "sbl/bpmf.hpp"
#include "sbl/errors.hpp"
#include "sbl/mf_baselines.hpp"

namespace sbl {

namespace {

// Runs job(i) for i in [0, count) on up to `threads` workers. Each job writes
// only its own output slot, so the result does not depend on scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& job) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) {
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

struct Summary {
  double mean = 0.0;
  double stderr_ = 0.0;
  bool skipped = false;
};

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) {
    s.skipped = true;
    return s;
  }
  for (double v : values) {
    if (std::isnan(v)) {
      s.skipped = true;
      s.mean = std::numeric_limits<double>::quiet_NaN();
      s.stderr_ = std::numeric_limits<double>::quiet_NaN();
      return s;
    }
    s.mean += v;
  }
  const double n = static_cast<double>(values.size());
  s.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

// Every algorithm sees the same problem for a given (axis point, trial).
SweepResult run_grid(SweepAxis axis, const std::vector<RunConfig>& point_cfgs,
                     const std::vector<double>& axis_values, const RunConfig& base,
                     std::span<const Algorithm> algorithms) {
  base.validate();
  for (const auto& c : point_cfgs) c.validate();

  SweepResult result;
  result.axis = axis;
  result.algorithms.assign(algorithms.begin(), algorithms.end());
  result.axis_values = axis_values;
  result.trials = base.trials;

  const int n_alg = static_cast<int>(algorithms.size());
  const int n_pts = static_cast<int>(point_cfgs.size());
  const int n_trials = base.trials;
  result.records.resize(static_cast<std::size_t>(n_alg) * n_pts * n_trials);
  auto slot = [&](int a, int p, int t) -> TrialRecord& {
    return result.records[(static_cast<std::size_t>(a) * n_pts + p) * n_trials + t];
  };

  parallel_for(n_pts * n_trials, base.threads, [&](int job) {
    const int p = job / n_trials;
    const int t = job % n_trials;
    const RunConfig& cfg = point_cfgs[static_cast<std::size_t>(p)];
    const Problem problem = generate_problem(cfg, static_cast<std::uint64_t>(t));
    const SolverOptions options = SolverOptions::from_config(cfg);
    for (int a = 0; a < n_alg; ++a) {
      TrialRecord& rec = slot(a, p, t);
      rec.algorithm = algorithms[static_cast<std::size_t>(a)];
      rec.axis_value = axis_values[static_cast<std::size_t>(p)];
      rec.trial = t;
      rec.trace = run_algorithm(rec.algorithm, problem, options);
      rec.trace.trial = t;
    }
  });
  return result;
}

}  // namespace

std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kSnrDb:
      return "snr_db";
    case SweepAxis::kK:
      return "k";
    case SweepAxis::kIteration:
      return "iteration";
  }
  return "unknown";
}

const SweepPoint& SweepResult::point(Algorithm alg, double axis_value) const {
  for (const auto& p : points) {
    if (p.algorithm == alg && p.axis_value == axis_value) return p;
  }
  throw ContractViolation("SweepResult: no point for " + std::string(algorithm_name(alg)) +
                          " at " + std::to_string(axis_value));
}

IterationTrace run_algorithm(Algorithm alg, const Problem& problem, const SolverOptions& options) {
  switch (alg) {
    case Algorithm::kBpmf:
      return run_bpmf(problem, options);
    case Algorithm::kAbpmf:
      return run_abpmf(problem, options);
    case Algorithm::kMfVector:
      return run_mf_vector(problem, options);
    case Algorithm::kMfScalar:
      return run_mf_scalar(problem, options);
  }
  throw ContractViolation("run_algorithm: unknown algorithm");
}

namespace {

void summarize_final(SweepResult& result) {
  const int n_pts = static_cast<int>(result.axis_values.size());
  for (std::size_t a = 0; a < result.algorithms.size(); ++a) {
    for (int p = 0; p < n_pts; ++p) {
      std::vector<double> finals;
      for (int t = 0; t < result.trials; ++t) {
        const auto& rec =
            result.records[(a * static_cast<std::size_t>(n_pts) + p) * result.trials + t];
        finals.push_back(rec.trace.final_nmse_db());
      }
      const Summary s = summarize(finals);
      result.points.push_back({result.algorithms[a], result.axis_values[p], s.mean, s.stderr_,
                               result.trials, s.skipped});
    }
  }
}

}  // namespace

SweepResult sweep_snr(const RunConfig& cfg, std::span<const double> snr_list,
                      std::span<const Algorithm> algorithms) {
  if (snr_list.empty()) throw ConfigError("sweep_snr: empty SNR list");
  std::vector<RunConfig> cfgs;
  std::vector<double> values;
  for (double snr : snr_list) {
    RunConfig c = cfg;
    c.snr_db = snr;
    cfgs.push_back(c);
    values.push_back(snr);
  }
  SweepResult result = run_grid(SweepAxis::kSnrDb, cfgs, values, cfg, algorithms);
  summarize_final(result);
  return result;
}

SweepResult sweep_k(const RunConfig& cfg, std::span<const int> k_list,
                    std::span<const Algorithm> algorithms) {
  if (k_list.empty()) throw ConfigError("sweep_k: empty K list");
  std::vector<RunConfig> cfgs;
  std::vector<double> values;
  for (int k : k_list) {
    RunConfig c = cfg;
    c.k_sparsity = k;
    cfgs.push_back(c);
    values.push_back(static_cast<double>(k));
  }
  SweepResult result = run_grid(SweepAxis::kK, cfgs, values, cfg, algorithms);
  summarize_final(result);
  return result;
}

SweepResult trace_convergence(const RunConfig& cfg, std::span<const Algorithm> algorithms) {
  SweepResult grid = run_grid(SweepAxis::kIteration, {cfg}, {cfg.snr_db}, cfg, algorithms);

  SweepResult result;
  result.axis = SweepAxis::kIteration;
  result.algorithms = grid.algorithms;
  result.trials = grid.trials;
  for (int it = 1; it <= cfg.iterations; ++it) result.axis_values.push_back(it);
  for (const auto& rec : grid.records) {
    TrialRecord r = rec;
    r.axis_value = 0.0;
    result.records.push_back(std::move(r));
  }
  for (std::size_t a = 0; a < result.algorithms.size(); ++a) {
    for (int it = 1; it <= cfg.iterations; ++it) {
      std::vector<double> values;
      for (int t = 0; t < result.trials; ++t) {
        const auto& rows = result.records[a * result.trials + t].trace.rows;
        if (rows.empty()) continue;
        // An early-stopped trace holds its last value.
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it), rows.size()) - 1;
        values.push_back(rows[idx].nmse_db);
      }
      const Summary s = summarize(values);
      result.points.push_back({result.algorithms[a], static_cast<double>(it), s.mean, s.stderr_,
                               result.trials, s.skipped});
    }
  }
  return result;
}

std::string csv_row(std::string_view algorithm, std::string_view axis, double axis_value,
                    int trial, const TraceRow& row) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*s,%.*s,%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g",
                static_cast<int>(algorithm.size()), algorithm.data(),
                static_cast<int>(axis.size()), axis.data(), axis_value, trial, row.iteration,
                row.nmse_db, row.mse_abs, row.lambda_hat, row.wall_ms);
  return buf;
}

void emit_csv(const SweepResult& result, std::ostream& out) {
  out << kCsvHeader << '\n';
  const std::string_view axis = axis_name(result.axis);
  for (const auto& rec : result.records) {
    const std::string_view alg = algorithm_name(rec.algorithm);
    for (const auto& row : rec.trace.rows) {
      const double axis_value =
          result.axis == SweepAxis::kIteration ? static_cast<double>(row.iteration)
                                               : rec.axis_value;
      out << csv_row(alg, axis, axis_value, rec.trial, row) << '\n';
    }
  }
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  emit_csv(result, out);
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace sbl
