#include "sbl/problem.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "sbl/errors.hpp"

namespace sbl {

void RunConfig::validate() const {
  if (m_rows < 1 || l_cols < 1) throw ConfigError("m and l must be positive");
  if (k_sparsity < 0) throw ConfigError("k must be non-negative");
  if (k_sparsity > l_cols) throw ConfigError("k must not exceed l");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (trials < 1) throw ConfigError("trials must be at least 1");
  if (!(epsilon >= 0.0) || !(eta >= 0.0)) throw ConfigError("epsilon and eta must be >= 0");
  if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("damping must lie in (0, 1]");
  if (!(early_stop_tol >= 0.0)) throw ConfigError("early stop tolerance must be >= 0");
  if (!std::isfinite(snr_db)) throw ConfigError("snr must be finite");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

double snr_to_lambda(double snr_db, int k) {
  if (k < 1) throw ContractViolation("snr_to_lambda: SNR is undefined for k = 0");
  return std::pow(10.0, snr_db / 10.0) / static_cast<double>(k);
}

Problem generate_problem(const RunConfig& cfg, std::uint64_t trial_index) {
  cfg.validate();

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(trial_index),
                    static_cast<std::uint32_t>(trial_index >> 32)};
  std::mt19937_64 rng(seq);
  // CN(0,1): independent real and imaginary parts of variance 1/2 each.
  std::normal_distribution<double> half(0.0, std::sqrt(0.5));
  auto cn01 = [&] {
    const double re = half(rng);
    const double im = half(rng);
    return Complex(re, im);
  };

  Problem p;
  p.m_rows = cfg.m_rows;
  p.l_cols = cfg.l_cols;
  p.k_sparsity = cfg.k_sparsity;
  p.seed = cfg.seed;

  p.phi.resize(cfg.m_rows, cfg.l_cols);
  for (int n = 0; n < cfg.m_rows; ++n) {
    for (int l = 0; l < cfg.l_cols; ++l) p.phi(n, l) = cn01();
  }

  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  std::vector<int> index(cfg.l_cols);
  std::iota(index.begin(), index.end(), 0);
  for (int i = 0; i < cfg.k_sparsity; ++i) {
    std::uniform_int_distribution<int> pick(i, cfg.l_cols - 1);
    std::swap(index[i], index[pick(rng)]);
  }
  p.alpha_true = CVector::Zero(cfg.l_cols);
  for (int i = 0; i < cfg.k_sparsity; ++i) p.alpha_true(index[i]) = cn01();

  p.lambda_true = cfg.k_sparsity > 0 ? snr_to_lambda(cfg.snr_db, cfg.k_sparsity)
                                     : std::pow(10.0, cfg.snr_db / 10.0);
  const double noise_scale = 1.0 / std::sqrt(p.lambda_true);
  p.y = p.phi * p.alpha_true;
  for (int n = 0; n < cfg.m_rows; ++n) p.y(n) += noise_scale * cn01();
  return p;
}

double nmse_db(const CVector& estimate, const CVector& truth) {
  if (estimate.size() != truth.size()) throw ContractViolation("nmse_db: length mismatch");
  const double denom = truth.squaredNorm();
  if (!(denom > 0.0)) throw ContractViolation("nmse_db: zero truth vector");
  const double ratio = (estimate - truth).squaredNorm() / denom;
  if (ratio <= 0.0) return kNmseFloorDb;
  return std::max(10.0 * std::log10(ratio), kNmseFloorDb);
}

double mse_abs(const CVector& estimate, const CVector& truth) {
  if (estimate.size() != truth.size()) throw ContractViolation("mse_abs: length mismatch");
  if (truth.size() == 0) return 0.0;
  return (estimate - truth).squaredNorm() / static_cast<double>(truth.size());
}

}  // namespace sbl
