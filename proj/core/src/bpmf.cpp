#include "sbl/bpmf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "sbl/errors.hpp"

namespace sbl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Product of the f -> alpha messages into column l; FLAT when none is informative.
GaussianMsg column_product(const EdgeMessageGrid& grid, int l) {
  double precision = 0.0;
  Complex weighted{0.0, 0.0};
  for (int n = 0; n < grid.rows(); ++n) {
    const double v = grid.f_to_a_var(n, l);
    if (v == kInf) continue;
    const double w = 1.0 / v;
    precision += w;
    weighted += w * grid.f_to_a_mean(n, l);
  }
  if (precision == 0.0) return GaussianMsg::flat();
  return GaussianMsg::from_precision(weighted / precision, precision);
}

// Eqs. for p over every row at once, walking the grid in storage order.
void compute_p(const EdgeMessageGrid& grid, const Problem& problem, CVector& p_mean,
               RVector& p_var) {
  const int rows = grid.rows();
  p_mean.setZero(rows);
  p_var.setZero(rows);
  for (int l = 0; l < grid.cols(); ++l) {
    for (int n = 0; n < rows; ++n) {
      if (!grid.active(n, l)) continue;
      const Complex phi = problem.phi(n, l);
      p_mean(n) += phi * grid.a_to_f_mean(n, l);
      p_var(n) += std::norm(phi) * grid.a_to_f_var(n, l);  // inf propagates
    }
  }
  for (int n = 0; n < rows; ++n) {
    if (p_var(n) == kInf) p_mean(n) = 0.0;
  }
}

void store(const GaussianMsg& m, Complex& mean, double& var) {
  mean = m.is_flat() ? Complex{} : m.mean();
  var = m.variance();
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

GaussianMsg EdgeMessageGrid::a_to_f(int n, int l) const {
  return GaussianMsg::from_moments(a_to_f_mean(n, l), a_to_f_var(n, l));
}

GaussianMsg EdgeMessageGrid::f_to_a(int n, int l) const {
  return GaussianMsg::from_moments(f_to_a_mean(n, l), f_to_a_var(n, l));
}

void EdgeMessageGrid::set_a_to_f(int n, int l, const GaussianMsg& m) {
  store(m, a_to_f_mean(n, l), a_to_f_var(n, l));
}

void EdgeMessageGrid::set_f_to_a(int n, int l, const GaussianMsg& m) {
  store(m, f_to_a_mean(n, l), f_to_a_var(n, l));
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active_edges(const CMatrix& phi) {
  const RMatrix abs2 = phi.cwiseAbs2();
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> active(phi.rows(), phi.cols());
  for (Eigen::Index n = 0; n < phi.rows(); ++n) {
    const double row_max = abs2.row(n).maxCoeff();
    for (Eigen::Index l = 0; l < phi.cols(); ++l) {
      active(n, l) = abs2(n, l) > 0.0 && abs2(n, l) >= kDegenerateEdgeRatio * row_max;
    }
  }
  return active;
}

std::pair<SolverState, EdgeMessageGrid> init_state(const Problem& problem,
                                                   const SolverOptions& options) {
  const int m = static_cast<int>(problem.phi.rows());
  const int l_cols = static_cast<int>(problem.phi.cols());
  if (problem.y.size() != m) throw ContractViolation("init_state: y length does not match phi");

  SolverState s;
  s.lambda_hat = options.start_lambda(problem);
  if (!(s.lambda_hat > 0.0)) throw ContractViolation("init_state: lambda must be positive");
  const double gamma0 = options.start_gamma();
  if (!(gamma0 > 0.0)) throw ContractViolation("init_state: gamma must be positive");

  EdgeMessageGrid g;
  g.active = active_edges(problem.phi);
  g.a_to_f_mean = CMatrix::Zero(m, l_cols);
  g.a_to_f_var = g.active.select(RMatrix::Ones(m, l_cols), kInf);
  g.f_to_a_mean = CMatrix::Zero(m, l_cols);
  g.f_to_a_var = RMatrix::Constant(m, l_cols, kInf);

  s.gamma_hat = RVector::Constant(l_cols, gamma0);
  s.alpha_mean = CVector::Zero(l_cols);
  s.alpha_var = s.gamma_hat.cwiseInverse();
  s.q_mean = CVector::Zero(l_cols);
  s.q_var = RVector::Constant(l_cols, kInf);
  compute_p(g, problem, s.p_mean, s.p_var);
  s.h_mean.resize(m);
  s.h_var.resize(m);
  for (int n = 0; n < m; ++n) {
    const GaussianMsg p = GaussianMsg::from_moments(s.p_mean(n), s.p_var(n));
    store(update_h_belief(problem.y(n), s.lambda_hat, p), s.h_mean(n), s.h_var(n));
  }
  return {std::move(s), std::move(g)};
}

GaussianMsg msg_obs_to_h(Complex y_n, double lambda_hat) {
  if (!(lambda_hat > 0.0)) throw ContractViolation("msg_obs_to_h: lambda must be positive");
  return GaussianMsg::from_moments(y_n, 1.0 / lambda_hat);
}

void msg_delta_to_alpha(const SolverState& state, EdgeMessageGrid& grid, const Problem& problem) {
  if (!(state.lambda_hat > 0.0)) {
    throw ContractViolation("msg_delta_to_alpha: lambda must be positive");
  }
  const double noise_var = 1.0 / state.lambda_hat;
  for (int l = 0; l < grid.cols(); ++l) {
    for (int n = 0; n < grid.rows(); ++n) {
      const double p_var = state.p_var(n);
      if (!grid.active(n, l) || p_var == kInf) {
        grid.f_to_a_mean(n, l) = 0.0;
        grid.f_to_a_var(n, l) = kInf;
        continue;
      }
      const Complex phi = problem.phi(n, l);
      const double phi2 = std::norm(phi);
      const double base = noise_var + p_var;
      const double numer = base - phi2 * grid.a_to_f_var(n, l);
      if (!(numer > 4.0 * kEps * base)) {
        grid.f_to_a_mean(n, l) = 0.0;
        grid.f_to_a_var(n, l) = kInf;
        continue;
      }
      grid.f_to_a_mean(n, l) =
          (problem.y(n) - state.p_mean(n)) * std::conj(phi) / phi2 + grid.a_to_f_mean(n, l);
      grid.f_to_a_var(n, l) = numer / phi2;
    }
  }
}

GaussianMsg combine_q(const EdgeMessageGrid& grid, int l) {
  GaussianMsg q = column_product(grid, l);
  if (q.is_flat()) throw NoInformation("combine_q: every incoming message is FLAT");
  return q;
}

GaussianMsg update_alpha_belief(const GaussianMsg& q, double gamma_hat) {
  if (!(gamma_hat > 0.0)) throw ContractViolation("update_alpha_belief: gamma must be positive");
  return gaussian_product(q, GaussianMsg::from_precision(Complex{}, gamma_hat));
}

double update_gamma(const GaussianMsg& alpha_belief, double epsilon, double eta) {
  const double rate = eta + second_moment(alpha_belief);
  if (!(rate > 0.0)) return kGammaMax;
  return std::clamp(GammaBelief{epsilon + 1.0, rate}.mean(), kGammaMin, kGammaMax);
}

void msg_alpha_to_delta(const SolverState& state, EdgeMessageGrid& grid) {
  for (int l = 0; l < grid.cols(); ++l) {
    const double belief_prec = 1.0 / state.alpha_var(l);
    const Complex belief_weighted = belief_prec * state.alpha_mean(l);
    for (int n = 0; n < grid.rows(); ++n) {
      if (!grid.active(n, l)) {
        grid.a_to_f_mean(n, l) = 0.0;
        grid.a_to_f_var(n, l) = kInf;
        continue;
      }
      const double in_var = grid.f_to_a_var(n, l);
      if (in_var == kInf) {
        grid.a_to_f_mean(n, l) = state.alpha_mean(l);
        grid.a_to_f_var(n, l) = state.alpha_var(l);
        continue;
      }
      const double in_prec = 1.0 / in_var;
      const double prec = belief_prec - in_prec;
      if (!(prec > 4.0 * kEps * belief_prec)) {
        grid.a_to_f_mean(n, l) = 0.0;
        grid.a_to_f_var(n, l) = kInf;
        continue;
      }
      const double var = 1.0 / prec;
      grid.a_to_f_var(n, l) = var;
      grid.a_to_f_mean(n, l) = var * (belief_weighted - in_prec * grid.f_to_a_mean(n, l));
    }
  }
}

GaussianMsg msg_delta_to_h(const EdgeMessageGrid& grid, const Problem& problem, int n) {
  Complex mean{0.0, 0.0};
  double var = 0.0;
  for (int l = 0; l < grid.cols(); ++l) {
    if (!grid.active(n, l)) continue;
    const double v = grid.a_to_f_var(n, l);
    if (v == kInf) return GaussianMsg::flat();
    const Complex phi = problem.phi(n, l);
    mean += phi * grid.a_to_f_mean(n, l);
    var += std::norm(phi) * v;
  }
  return GaussianMsg::from_moments(mean, var);
}

GaussianMsg update_h_belief(Complex y_n, double lambda_hat, const GaussianMsg& p) {
  return gaussian_product(msg_obs_to_h(y_n, lambda_hat), p);
}

double update_lambda(const CVector& y, const CVector& h_mean, const RVector& h_var) {
  if (h_mean.size() != y.size() || h_var.size() != y.size()) {
    throw ContractViolation("update_lambda: length mismatch");
  }
  const double denom = (y - h_mean).squaredNorm() + h_var.sum();
  if (!(denom > 0.0)) return kLambdaMax;
  return std::clamp(static_cast<double>(y.size()) / denom, kLambdaMin, kLambdaMax);
}

double update_lambda(const CVector& y, std::span<const GaussianMsg> h_beliefs) {
  if (static_cast<Eigen::Index>(h_beliefs.size()) != y.size()) {
    throw ContractViolation("update_lambda: length mismatch");
  }
  CVector mean(y.size());
  RVector var(y.size());
  for (Eigen::Index n = 0; n < y.size(); ++n) {
    const auto& b = h_beliefs[static_cast<std::size_t>(n)];
    if (b.is_flat()) throw ContractViolation("update_lambda: FLAT h belief");
    mean(n) = b.mean();
    var(n) = b.variance();
  }
  return update_lambda(y, mean, var);
}

void update_alpha_beliefs(const CVector& q_mean, const RVector& q_var, const RVector& gamma_hat,
                          CVector& alpha_mean, RVector& alpha_var) {
  // alpha = q / (1 + nu_q gamma), nu_alpha = (1/nu_q + gamma)^-1; nu_q = inf is a FLAT q.
  const auto q_prec = q_var.array().inverse();
  alpha_var = (q_prec + gamma_hat.array()).inverse().matrix();
  alpha_mean = (q_var.array() == kInf)
                   .select(Complex{}, q_mean.array() / (1.0 + q_var.array() * gamma_hat.array())
                                                           .cast<Complex>())
                   .matrix();
}

void update_gammas(const CVector& alpha_mean, const RVector& alpha_var, double epsilon,
                   double eta, RVector& gamma_hat) {
  const auto rate = eta + alpha_mean.array().abs2() + alpha_var.array();
  // A zero rate divides to +inf and lands on kGammaMax.
  gamma_hat = ((epsilon + 1.0) / rate).min(kGammaMax).max(kGammaMin).matrix();
}

void update_h_beliefs(const CVector& y, double lambda_hat, const CVector& p_mean,
                      const RVector& p_var, CVector& h_mean, RVector& h_var) {
  if (!(lambda_hat > 0.0)) throw ContractViolation("update_h_beliefs: lambda must be positive");
  const auto p_prec = p_var.array().inverse();  // 0 for FLAT, inf for a point mass
  h_var = (lambda_hat + p_prec).inverse().matrix();
  const auto weighted = lambda_hat * y.array() + p_mean.array() * p_prec.cast<Complex>();
  h_mean = (p_var.array() == 0.0)
               .select(p_mean.array(), weighted * h_var.array().cast<Complex>())
               .matrix();
}

BpmfSolver::BpmfSolver(const Problem& problem, SolverOptions options)
    : problem_(problem), options_(std::move(options)) {
  std::tie(state_, grid_) = init_state(problem_, options_);
}

void BpmfSolver::refresh_beliefs() {
  update_alpha_beliefs(state_.q_mean, state_.q_var, state_.gamma_hat, state_.alpha_mean,
                       state_.alpha_var);
}

void BpmfSolver::iterate() {
  msg_delta_to_alpha(state_, grid_, problem_);
  for (int l = 0; l < grid_.cols(); ++l) {
    store(column_product(grid_, l), state_.q_mean(l), state_.q_var(l));
  }
  refresh_beliefs();
  if (!options_.fixed_gamma) {
    update_gammas(state_.alpha_mean, state_.alpha_var, options_.epsilon, options_.eta,
                  state_.gamma_hat);
  }
  // Second refresh with the new gamma before the beliefs leave the node.
  refresh_beliefs();
  msg_alpha_to_delta(state_, grid_);
  compute_p(grid_, problem_, state_.p_mean, state_.p_var);
  update_h_beliefs(problem_.y, state_.lambda_hat, state_.p_mean, state_.p_var, state_.h_mean,
                   state_.h_var);
  if (!options_.fixed_lambda) {
    state_.lambda_hat = update_lambda(problem_.y, state_.h_mean, state_.h_var);
  }
  ++iterations_;
}

IterationTrace run_bpmf(const Problem& problem, const SolverOptions& options) {
  IterationTrace trace;
  trace.algorithm = std::string(algorithm_name(Algorithm::kBpmf));
  BpmfSolver solver(problem, options);
  CVector previous = solver.state().alpha_mean;
  for (int t = 0; t < options.iterations; ++t) {
    const auto start = std::chrono::steady_clock::now();
    solver.iterate();
    const double ms = options.record_wall_time ? elapsed_ms(start) : 0.0;
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

IterationTrace run_bpmf(const Problem& problem, const RunConfig& cfg) {
  cfg.validate();
  return run_bpmf(problem, SolverOptions::from_config(cfg));
}

}  // namespace sbl
