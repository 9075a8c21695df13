#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sbl/bpmf.hpp"
#include "sbl/errors.hpp"
#include "sbl/mf_baselines.hpp"
#include "test_util.hpp"

namespace sbl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void expect_msg(const GaussianMsg& m, Complex mean, double var, double tol = 1e-13) {
  ASSERT_FALSE(m.is_flat());
  EXPECT_LE(std::abs(m.mean() - mean), tol * (1.0 + std::abs(mean))) << m.mean();
  EXPECT_LE(std::abs(m.variance() - var), tol * (1.0 + var)) << m.variance();
}

Problem scalar_problem(Complex phi, Complex y) {
  Problem p;
  p.m_rows = p.l_cols = 1;
  p.phi = CMatrix::Constant(1, 1, phi);
  p.y = CVector::Constant(1, y);
  p.alpha_true = CVector::Zero(1);
  return p;
}

// A grid of the given shape whose f -> alpha messages are set explicitly.
EdgeMessageGrid grid_with_incoming(const std::vector<GaussianMsg>& column) {
  const int m = static_cast<int>(column.size());
  EdgeMessageGrid g;
  g.a_to_f_mean = CMatrix::Zero(m, 1);
  g.a_to_f_var = RMatrix::Ones(m, 1);
  g.f_to_a_mean = CMatrix::Zero(m, 1);
  g.f_to_a_var = RMatrix::Constant(m, 1, kInf);
  g.active = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m, 1, true);
  for (int n = 0; n < m; ++n) g.set_f_to_a(n, 0, column[n]);
  return g;
}

TEST(InitState, Defaults) {
  RunConfig cfg;
  const auto p = generate_problem(cfg, 0);
  const auto [state, grid] = init_state(p, SolverOptions{});
  EXPECT_EQ(grid.rows(), 100);
  EXPECT_EQ(grid.cols(), 200);
  EXPECT_TRUE(grid.a_to_f_mean.isZero(0.0));
  EXPECT_TRUE(grid.a_to_f_var.isOnes(0.0));
  EXPECT_TRUE(state.gamma_hat.isOnes(0.0));
  const RVector row_energy = p.phi.cwiseAbs2().rowwise().sum();
  EXPECT_LE((state.p_var - row_energy).cwiseAbs().maxCoeff(), 1e-12 * row_energy.maxCoeff());
  EXPECT_NEAR(state.lambda_hat, 100.0 / p.y.squaredNorm(), 1e-15);
}

TEST(InitState, ZeroObservationThrows) {
  auto p = scalar_problem(1.0, 0.0);
  EXPECT_THROW(init_state(p, SolverOptions{}), ContractViolation);
}

TEST(MsgObsToH, Examples) {
  expect_msg(msg_obs_to_h({1.0, 0.0}, 1.0), 1.0, 1.0);
  expect_msg(msg_obs_to_h(0.0, 4.0), 0.0, 0.25);
  expect_msg(msg_obs_to_h({2.0, -1.0}, 0.5), Complex(2.0, -1.0), 2.0);
  EXPECT_THROW(msg_obs_to_h(1.0, 0.0), ContractViolation);
  EXPECT_THROW(msg_obs_to_h(1.0, -1.0), ContractViolation);
}

TEST(MsgDeltaToAlpha, ScalarExample) {
  const auto p = scalar_problem(1.0, 2.0);
  auto [state, grid] = init_state(p, SolverOptions{});
  state.lambda_hat = 1.0;
  EXPECT_EQ(state.p_mean(0), Complex(0.0));
  EXPECT_DOUBLE_EQ(state.p_var(0), 1.0);
  msg_delta_to_alpha(state, grid, p);
  expect_msg(grid.f_to_a(0, 0), 2.0, 1.0);
}

TEST(MsgDeltaToAlpha, ZeroEntryIsFlat) {
  Problem p;
  p.m_rows = 1;
  p.l_cols = 2;
  p.phi = CMatrix(1, 2);
  p.phi << Complex(1.0, 0.5), Complex(0.0);
  p.y = CVector::Constant(1, Complex(1.0));
  p.alpha_true = CVector::Zero(2);
  auto [state, grid] = init_state(p, SolverOptions{});
  EXPECT_FALSE(grid.active(0, 1));
  msg_delta_to_alpha(state, grid, p);
  EXPECT_TRUE(grid.f_to_a(0, 1).is_flat());
  EXPECT_FALSE(grid.f_to_a(0, 0).is_flat());
}

TEST(MsgDeltaToAlpha, ScalingAnEntry) {
  std::mt19937_64 rng(5);
  auto p = test::make_problem(test::random_matrix(3, 4, rng), test::random_vector(4, rng),
                              CVector::Zero(3), 1.0);
  auto [s1, g1] = init_state(p, SolverOptions{});
  g1.a_to_f_mean = test::random_matrix(3, 4, rng);
  // Recompute p for the randomized edges.
  for (int n = 0; n < 3; ++n) {
    const auto h = msg_delta_to_h(g1, p, n);
    s1.p_mean(n) = h.mean();
    s1.p_var(n) = h.variance();
  }
  const Complex c(2.0, -1.0);
  auto q = p;
  q.phi(1, 2) *= c;
  auto s2 = s1;
  auto g2 = g1;
  for (int n = 0; n < 3; ++n) {
    const auto h = msg_delta_to_h(g2, q, n);
    s2.p_mean(n) = h.mean();
    s2.p_var(n) = h.variance();
  }
  msg_delta_to_alpha(s1, g1, p);
  msg_delta_to_alpha(s2, g2, q);
  // The scaled edge scales; rows that do not contain it are untouched.
  EXPECT_LE(test::rel_diff(g2.f_to_a_mean(1, 2), g1.f_to_a_mean(1, 2) / c), 1e-12);
  EXPECT_LE(test::rel_diff(g2.f_to_a_var(1, 2), g1.f_to_a_var(1, 2) / std::norm(c)), 1e-12);
  for (int n : {0, 2}) {
    for (int l = 0; l < 4; ++l) {
      EXPECT_EQ(g2.f_to_a_mean(n, l), g1.f_to_a_mean(n, l));
      EXPECT_EQ(g2.f_to_a_var(n, l), g1.f_to_a_var(n, l));
    }
  }
}

TEST(CombineQ, Examples) {
  const auto u = GaussianMsg::from_moments(0.0, 1.0);
  expect_msg(combine_q(grid_with_incoming({u, u}), 0), 0.0, 0.5);
  const auto single = GaussianMsg::from_moments({1.0, 2.0}, 0.3);
  expect_msg(combine_q(grid_with_incoming({single}), 0), Complex(1.0, 2.0), 0.3);
  expect_msg(combine_q(grid_with_incoming({GaussianMsg::from_moments(1.0, 1.0),
                                           GaussianMsg::from_moments(3.0, 0.5)}),
                       0),
             7.0 / 3.0, 1.0 / 3.0);
  EXPECT_THROW(combine_q(grid_with_incoming({GaussianMsg::flat(), GaussianMsg::flat()}), 0),
               NoInformation);
}

TEST(UpdateAlphaBelief, Examples) {
  expect_msg(update_alpha_belief(GaussianMsg::from_moments(1.0, 1.0), 1e-12), 1.0, 1.0, 1e-11);
  expect_msg(update_alpha_belief(GaussianMsg::from_moments(2.0, 1.0), 1.0), 1.0, 0.5);
  const auto tight = update_alpha_belief(GaussianMsg::from_moments({3.0, 1.0}, 2.0), 1e12);
  EXPECT_LT(std::abs(tight.mean()), 1e-11);
  EXPECT_LT(tight.variance(), 1.1e-12);
  expect_msg(update_alpha_belief(GaussianMsg::flat(), 4.0), 0.0, 0.25);
}

TEST(UpdateGamma, Examples) {
  EXPECT_DOUBLE_EQ(update_gamma(GaussianMsg::from_moments(1.0, 0.0), 0.0, 0.0), 1.0);
  EXPECT_NEAR(update_gamma(GaussianMsg::from_moments(std::sqrt(0.5), 0.5), 1.0, 1.0), 1.0, 1e-15);
  EXPECT_EQ(update_gamma(GaussianMsg::from_moments(0.0, 0.0), 0.0, 0.0), kGammaMax);
  EXPECT_EQ(update_gamma(GaussianMsg::from_moments(0.0, 1e-300), 0.0, 0.0), kGammaMax);
  EXPECT_EQ(update_gamma(GaussianMsg::from_moments(1e10, 0.0), 0.0, 0.0), kGammaMin);
}

TEST(MsgAlphaToDelta, Examples) {
  auto check = [](GaussianMsg belief, GaussianMsg incoming) {
    SolverState s;
    s.alpha_mean = CVector::Constant(1, belief.mean());
    s.alpha_var = RVector::Constant(1, belief.variance());
    auto g = grid_with_incoming({incoming});
    msg_alpha_to_delta(s, g);
    return g.a_to_f(0, 0);
  };
  expect_msg(check(GaussianMsg::from_moments(7.0 / 3.0, 1.0 / 3.0),
                   GaussianMsg::from_moments(1.0, 1.0)),
             3.0, 0.5);
  const auto b = GaussianMsg::from_moments({1.0, -1.0}, 0.7);
  expect_msg(check(b, GaussianMsg::flat()), b.mean(), b.variance());
  EXPECT_TRUE(check(b, b).is_flat());
}

TEST(MsgDeltaToH, Examples) {
  Problem p;
  p.m_rows = 1;
  p.l_cols = 2;
  p.phi = CMatrix(1, 2);
  p.phi << 1.0, 2.0;
  p.y = CVector::Ones(1);
  EdgeMessageGrid g;
  g.a_to_f_mean = CMatrix::Ones(1, 2);
  g.a_to_f_var = RMatrix::Ones(1, 2);
  g.f_to_a_mean = CMatrix::Zero(1, 2);
  g.f_to_a_var = RMatrix::Ones(1, 2);
  g.active = active_edges(p.phi);
  expect_msg(msg_delta_to_h(g, p, 0), 3.0, 5.0);

  g.a_to_f_mean.setZero();
  expect_msg(msg_delta_to_h(g, p, 0), 0.0, 5.0);

  g.a_to_f_var(0, 1) = kInf;
  EXPECT_TRUE(msg_delta_to_h(g, p, 0).is_flat());

  Problem one = p;
  one.l_cols = 1;
  one.phi = CMatrix::Constant(1, 1, Complex(0.0, 2.0));
  EdgeMessageGrid g1;
  g1.a_to_f_mean = CMatrix::Constant(1, 1, Complex(1.5, 0.0));
  g1.a_to_f_var = RMatrix::Constant(1, 1, 0.25);
  g1.f_to_a_mean = CMatrix::Zero(1, 1);
  g1.f_to_a_var = RMatrix::Ones(1, 1);
  g1.active = active_edges(one.phi);
  expect_msg(msg_delta_to_h(g1, one, 0), Complex(0.0, 3.0), 1.0);
}

TEST(MsgDeltaToH, VarianceMonotoneInEdgeVariance) {
  std::mt19937_64 rng(11);
  auto p = test::make_problem(test::random_matrix(2, 5, rng), CVector::Zero(5),
                              CVector::Ones(2), 1.0);
  auto [state, grid] = init_state(p, SolverOptions{});
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int l = 0; l < 5; ++l) grid.a_to_f_var(0, l) = u(rng);
  double prev = msg_delta_to_h(grid, p, 0).variance();
  EXPECT_GE(prev, 0.0);
  for (int l = 0; l < 5; ++l) {
    grid.a_to_f_var(0, l) *= 2.0;
    const double now = msg_delta_to_h(grid, p, 0).variance();
    EXPECT_GE(now, prev);
    prev = now;
  }
}

TEST(UpdateHBelief, Examples) {
  expect_msg(update_h_belief(2.0, 1.0, GaussianMsg::from_moments(0.0, 1.0)), 1.0, 0.5);
  expect_msg(update_h_belief({2.0, 1.0}, 3.0, GaussianMsg::flat()), Complex(2.0, 1.0), 1.0 / 3.0);
  const auto sharp = update_h_belief(2.0, 1e12, GaussianMsg::from_moments(0.0, 1.0));
  EXPECT_NEAR(sharp.mean().real(), 2.0, 1e-11);
  EXPECT_LT(sharp.variance(), 1.1e-12);
}

TEST(UpdateLambda, Examples) {
  CVector y(2);
  y << 1.0, Complex(0.0, 1.0);
  const std::vector<GaussianMsg> h2{GaussianMsg::from_moments(0.0, 0.0),
                                    GaussianMsg::from_moments(0.0, 0.0)};
  EXPECT_DOUBLE_EQ(update_lambda(y, h2), 1.0);

  CVector y4 = CVector::Constant(4, Complex(0.5, -2.0));
  std::vector<GaussianMsg> h4(4, GaussianMsg::from_moments(Complex(0.5, -2.0), 0.5));
  EXPECT_DOUBLE_EQ(update_lambda(y4, h4), 2.0);
  EXPECT_DOUBLE_EQ(update_lambda(y4, y4, RVector::Constant(4, 0.5)), 2.0);

  std::vector<GaussianMsg> exact(4, GaussianMsg::from_moments(Complex(0.5, -2.0), 0.0));
  EXPECT_EQ(update_lambda(y4, exact), kLambdaMax);
}

TEST(BpmfSolver, StateStaysValidAndClamped) {
  RunConfig cfg;
  cfg.m_rows = 40;
  cfg.l_cols = 80;
  cfg.k_sparsity = 8;
  for (int t = 0; t < 3; ++t) {
    const auto p = generate_problem(cfg, t);
    BpmfSolver solver(p, SolverOptions{});
    for (int it = 0; it < 30; ++it) {
      solver.iterate();
      const auto& s = solver.state();
      ASSERT_TRUE(std::isfinite(s.lambda_hat));
      EXPECT_GE(s.lambda_hat, kLambdaMin);
      EXPECT_LE(s.lambda_hat, kLambdaMax);
      EXPECT_GE(s.gamma_hat.minCoeff(), kGammaMin);
      EXPECT_LE(s.gamma_hat.maxCoeff(), kGammaMax);
      EXPECT_GT(s.alpha_var.minCoeff(), 0.0);
      EXPECT_TRUE(s.alpha_mean.allFinite());
      const auto& g = solver.grid();
      EXPECT_FALSE((g.a_to_f_var.array() <= 0.0).any());
      EXPECT_FALSE((g.f_to_a_var.array() <= 0.0).any());
      EXPECT_FALSE(g.a_to_f_var.array().isNaN().any());
    }
  }
}

// With the hyperparameters frozen, the fixed point of the message passing
// is the Gaussian posterior mean that the vector-form solver computes.
TEST(BpmfSolver, FrozenFixedPointIsPosteriorMean) {
  RunConfig cfg;
  cfg.m_rows = 30;
  cfg.l_cols = 60;
  cfg.k_sparsity = 6;
  cfg.snr_db = 20.0;
  const auto p = generate_problem(cfg, 0);
  SolverOptions opt;
  opt.iterations = 150;
  opt.fixed_lambda = 10.0;
  opt.fixed_gamma = 1.0;
  BpmfSolver bp(p, opt);
  for (int i = 0; i < opt.iterations; ++i) bp.iterate();
  MfVectorSolver mf(p, opt);
  mf.iterate();
  EXPECT_LT((bp.state().alpha_mean - mf.mean()).norm() / mf.mean().norm(), 1e-8);
}

TEST(RunBpmf, PureNoiseIsPruned) {
  RunConfig cfg;
  cfg.k_sparsity = 0;
  for (int t = 0; t < 3; ++t) {
    const auto p = generate_problem(cfg, t);
    const auto trace = run_bpmf(p, cfg);
    ASSERT_EQ(trace.rows.size(), 20u);
    EXPECT_TRUE(std::isnan(trace.final_nmse_db()));
    // Per-coefficient energy relative to what a unit-variance coefficient carries.
    EXPECT_LT(trace.alpha_estimate.squaredNorm() / p.l_cols, 1e-3);
  }
}

TEST(RunBpmf, HighSnrRecovery) {
  RunConfig cfg;
  cfg.m_rows = 15;
  cfg.l_cols = 20;
  cfg.k_sparsity = 5;
  cfg.snr_db = 40.0;
  double acc = 0.0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) acc += run_bpmf(generate_problem(cfg, t), cfg).final_nmse_db();
  EXPECT_LT(acc / trials, -30.0);
}

TEST(RunBpmf, TraceShape) {
  RunConfig cfg;
  cfg.m_rows = 20;
  cfg.l_cols = 40;
  cfg.k_sparsity = 4;
  cfg.iterations = 7;
  const auto trace = run_bpmf(generate_problem(cfg, 0), cfg);
  ASSERT_EQ(trace.rows.size(), 7u);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(trace.rows[i].iteration, i + 1);
  EXPECT_EQ(trace.algorithm, "bpmf");
}

}  // namespace
}  // namespace sbl
