// sblbench: problem generation, single runs and Monte Carlo sweeps.
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_support.hpp"
#include "sbl/bpmf.hpp"
#include "sbl/errors.hpp"
#include "sbl/harness.hpp"
#include "sbl/oracles.hpp"
#include "sbl/problem.hpp"
#include "sbl/problem_io.hpp"

namespace {

struct Flags {
  sbl::RunConfig cfg;
  std::string out;
  std::string algs = "all";
  std::string snr;
  std::string k;
  int trial = 0;
  bool no_timing = false;
  // run
  std::string alg;
  std::string problem;
  bool check = false;
};

// CSV goes to --out or stdout; the summary goes to stderr so that piping the
// CSV stays clean.
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw sbl::IoError("cannot open " + path + " for writing");
  fn(file);
  file.flush();
  if (!file) throw sbl::IoError("write failed: " + path);
}

void print_summary(const sbl::SweepResult& result) {
  std::fprintf(stderr, "%-10s %12s %14s %10s\n", "algorithm",
               std::string(sbl::axis_name(result.axis)).c_str(), "mean_nmse_db", "stderr");
  for (const auto& p : result.points) {
    const std::string name(sbl::algorithm_name(p.algorithm));
    if (p.skipped) {
      std::fprintf(stderr, "%-10s %12g %14s %10s\n", name.c_str(), p.axis_value, "skipped", "-");
    } else {
      std::fprintf(stderr, "%-10s %12g %14.3f %10.3f\n", name.c_str(), p.axis_value,
                   p.mean_nmse_db, p.stderr_nmse_db);
    }
  }
}

void emit_sweep(const Flags& f, const sbl::SweepResult& result) {
  with_output(f.out, [&](std::ostream& os) { sbl::emit_csv(result, os); });
  print_summary(result);
}

void write_check_report(std::ostream& os, sbl::Algorithm alg, const sbl::Problem& problem,
                        const sbl::SolverOptions& options, const sbl::IterationTrace& trace) {
  char buf[256];
  os << "# check\n";
  if (alg == sbl::Algorithm::kBpmf) {
    sbl::BpmfSolver solver(problem, options);
    double worst = 0.0;
    int skipped = 0;
    for (int it = 0; it < options.iterations; ++it) {
      solver.iterate();
      const auto report = sbl::belief_consistency_check(solver.state(), solver.grid());
      worst = std::max(worst, report.max_deviation());
      skipped = std::max(skipped, report.skipped_columns);
    }
    std::snprintf(buf, sizeof buf, "# belief_consistency max_deviation=%.17g skipped_columns=%d\n",
                  worst, skipped);
    os << buf;
  }
  if (alg == sbl::Algorithm::kBpmf || alg == sbl::Algorithm::kAbpmf) {
    const auto gap = sbl::approximation_gap(problem, options, options.iterations);
    std::snprintf(buf, sizeof buf,
                  "# approximation_gap q_mean=%.17g q_var=%.17g p_mean=%.17g p_var=%.17g\n",
                  gap.q_mean, gap.q_var, gap.p_mean, gap.p_var);
    os << buf;
  }
  const auto support = static_cast<int>((problem.alpha_true.array() != sbl::Complex(0.0)).count());
  if (support > 0 && support <= problem.m_rows) {
    const double floor_db = sbl::nmse_db(sbl::support_oracle(problem), problem.alpha_true);
    std::snprintf(buf, sizeof buf, "# support_oracle nmse_db=%.17g final_nmse_db=%.17g gap_db=%.17g\n",
                  floor_db, trace.final_nmse_db(), trace.final_nmse_db() - floor_db);
    os << buf;
  } else {
    os << "# support_oracle skipped (support empty or larger than M)\n";
  }
}

void cmd_generate(const Flags& f) {
  const auto problem = sbl::generate_problem(f.cfg, f.trial);
  with_output(f.out, [&](std::ostream& os) { sbl::write_problem(os, problem); });
}

void cmd_run(const Flags& f) {
  const auto alg = sbl::parse_algorithm(f.alg);
  const auto problem = sbl::read_problem(std::filesystem::path(f.problem));
  auto options = sbl::SolverOptions::from_config(f.cfg);
  const auto trace = sbl::run_algorithm(alg, problem, options);
  with_output(f.out, [&](std::ostream& os) {
    os << sbl::kCsvHeader << '\n';
    for (const auto& row : trace.rows) {
      os << sbl::csv_row(sbl::algorithm_name(alg), "iteration", row.iteration, 0, row) << '\n';
    }
    if (f.check) write_check_report(os, alg, problem, options, trace);
  });
  std::fprintf(stderr, "%s final nmse_db=%.4f lambda_hat=%.6g\n",
               std::string(sbl::algorithm_name(alg)).c_str(), trace.final_nmse_db(),
               trace.rows.empty() ? 0.0 : trace.rows.back().lambda_hat);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Bayesian learning benchmark driver"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");

  Flags f;
  auto& c = f.cfg;
  app.add_option("--m", c.m_rows, "Measurements (rows of Phi)")->capture_default_str();
  app.add_option("--l", c.l_cols, "Dictionary columns")->capture_default_str();
  app.add_option("--k", f.k, "Nonzeros; a comma list for sweep-k");
  app.add_option("--snr", f.snr, "SNR in dB; a:b:step for sweep-snr");
  app.add_option("--iters", c.iterations, "Iterations per run")->capture_default_str();
  app.add_option("--trials", c.trials, "Monte Carlo trials per point")->capture_default_str();
  app.add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app.add_option("--epsilon", c.epsilon, "Gamma hyperprior shape")->capture_default_str();
  app.add_option("--eta", c.eta, "Gamma hyperprior rate")->capture_default_str();
  app.add_option("--damping", c.damping, "Damping factor in (0, 1] for the approximate solver")
      ->capture_default_str();
  app.add_option("--early-stop", c.early_stop_tol, "Stop when the relative change drops below")
      ->capture_default_str();
  app.add_option("--threads", c.threads, "Worker threads (0 = hardware)")->capture_default_str();
  app.add_option("--algs", f.algs, "Comma list of algorithms for sweeps, or 'all'")
      ->capture_default_str();
  app.add_option("--out", f.out, "Output file (default stdout)");
  app.add_flag("--no-timing,--deterministic", f.no_timing,
               "Write wall_ms as 0 so reruns are byte-identical");

  auto* gen = app.add_subcommand("generate", "Write one problem instance");
  gen->add_option("--trial", f.trial, "Trial index")->capture_default_str();
  auto* run = app.add_subcommand("run", "Run one algorithm on a problem file");
  run->add_option("--alg", f.alg, "bpmf | abpmf | mf-vector | mf-scalar")->required();
  run->add_option("--problem", f.problem, "Problem file written by 'generate'")->required();
  run->add_flag("--check", f.check, "Append oracle reports");
  auto* ssnr = app.add_subcommand("sweep-snr", "Final NMSE against SNR");
  auto* sk = app.add_subcommand("sweep-k", "Final NMSE against sparsity");
  auto* tr = app.add_subcommand("trace", "Mean NMSE against iteration");
  for (auto* sub : {gen, run, ssnr, sk, tr}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (f.no_timing) c.record_wall_time = false;
    if (!f.snr.empty() && !ssnr->parsed()) {
      const auto snrs = sbl::cli::parse_snr_range(f.snr);
      if (snrs.size() != 1) throw sbl::ConfigError("--snr takes a single value here");
      c.snr_db = snrs.front();
    }
    if (!f.k.empty() && !sk->parsed()) {
      const auto ks = sbl::cli::parse_int_list(f.k);
      if (ks.size() != 1) throw sbl::ConfigError("--k takes a single value here");
      c.k_sparsity = ks.front();
    }
    const auto algs = sbl::cli::parse_algorithm_list(f.algs);

    if (gen->parsed()) {
      c.validate();
      cmd_generate(f);
    } else if (run->parsed()) {
      c.validate();
      cmd_run(f);
    } else if (ssnr->parsed()) {
      const auto snrs = sbl::cli::parse_snr_range(f.snr.empty() ? "0:30:2" : f.snr);
      emit_sweep(f, sbl::sweep_snr(c, snrs, algs));
    } else if (sk->parsed()) {
      const auto ks = sbl::cli::parse_int_list(f.k.empty() ? "5,10,15,20,26,30,35,40" : f.k);
      emit_sweep(f, sbl::sweep_k(c, ks, algs));
    } else if (tr->parsed()) {
      emit_sweep(f, sbl::trace_convergence(c, algs));
    }
  } catch (const sbl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
