#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sbl/errors.hpp"
#include "sbl/gaussian.hpp"
#include "test_util.hpp"

namespace sbl {
namespace {

using test::rel_diff;
constexpr double kInf = std::numeric_limits<double>::infinity();

void expect_msg(const GaussianMsg& m, Complex mean, double var, double tol = 1e-14) {
  EXPECT_FALSE(m.is_flat());
  EXPECT_LE(std::abs(m.mean() - mean), tol * (1.0 + std::abs(mean))) << m.mean();
  EXPECT_LE(std::abs(m.variance() - var), tol * var) << m.variance();
}

TEST(GaussianMsg, MomentsAndFlat) {
  const auto m = GaussianMsg::from_moments({1.0, -2.0}, 0.25);
  EXPECT_DOUBLE_EQ(m.precision(), 4.0);
  EXPECT_EQ(m.mean(), Complex(1.0, -2.0));
  EXPECT_TRUE(GaussianMsg::flat().is_flat());
  EXPECT_EQ(GaussianMsg::flat().variance(), kInf);
  EXPECT_TRUE(GaussianMsg::from_moments(0.0, kInf).is_flat());
  EXPECT_TRUE(GaussianMsg::from_moments(3.0, 0.0).is_point_mass());
}

TEST(GaussianMsg, RejectsBadVariance) {
  EXPECT_THROW(GaussianMsg::from_moments(0.0, -1.0), ContractViolation);
  EXPECT_THROW(GaussianMsg::from_moments(0.0, std::nan("")), ContractViolation);
}

TEST(GammaBelief, MeanAndValidation) {
  EXPECT_DOUBLE_EQ(GammaBelief::make(3.0, 2.0).mean(), 1.5);
  EXPECT_THROW(GammaBelief::make(0.0, 1.0), ContractViolation);
  EXPECT_THROW(GammaBelief::make(1.0, -1.0), ContractViolation);
}

TEST(GaussianProduct, Examples) {
  const auto a = GaussianMsg::from_moments(0.0, 1.0);
  expect_msg(gaussian_product(a, a), 0.0, 0.5);
  const std::vector<GaussianMsg> one{GaussianMsg::from_moments(2.0, 1.0)};
  expect_msg(gaussian_product(one), 2.0, 1.0);
  expect_msg(gaussian_product(GaussianMsg::from_moments(1.0, 1.0),
                              GaussianMsg::from_moments(3.0, 0.5)),
             7.0 / 3.0, 1.0 / 3.0);
}

TEST(GaussianProduct, FlatSemantics) {
  const auto a = GaussianMsg::from_moments({1.0, 1.0}, 2.0);
  EXPECT_EQ(gaussian_product(a, GaussianMsg::flat()), a);
  EXPECT_EQ(gaussian_product(GaussianMsg::flat(), a), a);
  const std::vector<GaussianMsg> flats(3);
  EXPECT_THROW(gaussian_product(flats), NoInformation);
  EXPECT_THROW(gaussian_product(std::span<const GaussianMsg>{}), NoInformation);
}

TEST(GaussianProduct, PointMassDominates) {
  const auto pm = GaussianMsg::from_moments(3.0, 0.0);
  const auto r = gaussian_product(pm, GaussianMsg::from_moments(-1.0, 1.0));
  EXPECT_TRUE(r.is_point_mass());
  EXPECT_EQ(r.mean(), Complex(3.0));
}

TEST(GaussianDivide, Examples) {
  const auto belief = GaussianMsg::from_moments(7.0 / 3.0, 1.0 / 3.0);
  expect_msg(gaussian_divide(belief, GaussianMsg::from_moments(1.0, 1.0)), 3.0, 0.5, 1e-13);
  const auto m = GaussianMsg::from_moments({0.5, 2.0}, 3.0);
  EXPECT_EQ(gaussian_divide(m, GaussianMsg::flat()), m);
  const auto u = GaussianMsg::from_moments(0.0, 1.0);
  EXPECT_TRUE(gaussian_divide(u, u).is_flat());
}

TEST(GaussianDivide, NegativePrecisionIsFlat) {
  const auto belief = GaussianMsg::from_moments(1.0, 2.0);
  const auto sharper = GaussianMsg::from_moments(0.0, 1.0);
  EXPECT_TRUE(gaussian_divide(belief, sharper).is_flat());
  EXPECT_THROW(gaussian_divide(GaussianMsg::flat(), sharper), ContractViolation);
}

TEST(SecondMoment, Examples) {
  EXPECT_DOUBLE_EQ(second_moment(GaussianMsg::from_moments(0.0, 1.0)), 1.0);
  EXPECT_DOUBLE_EQ(second_moment(GaussianMsg::from_moments(3.0, 0.0)), 9.0);
  EXPECT_NEAR(second_moment(GaussianMsg::from_moments({1.0, 1.0}, 2.0)), 4.0, 1e-15);
  EXPECT_THROW(second_moment(GaussianMsg::flat()), ContractViolation);
}

class GaussianProperties : public ::testing::Test {
 protected:
  // Variances log-uniform over [10^-decades, 10^decades].
  GaussianMsg draw(double decades = 4.0) {
    std::normal_distribution<double> n(0.0, 3.0);
    std::uniform_real_distribution<double> logv(-decades, decades);
    return GaussianMsg::from_moments({n(rng_), n(rng_)}, std::pow(10.0, logv(rng_)));
  }
  std::mt19937_64 rng_{20240611};
};

TEST_F(GaussianProperties, CommutativeAndAssociative) {
  for (int i = 0; i < 2000; ++i) {
    const auto a = draw(), b = draw(), c = draw();
    const auto ab = gaussian_product(a, b), ba = gaussian_product(b, a);
    EXPECT_LE(rel_diff(ab.precision(), ba.precision()), 1e-12);
    EXPECT_LE(std::abs(ab.mean() - ba.mean()), 1e-12 * (std::abs(ab.mean()) + std::sqrt(ab.variance())));
    const auto l = gaussian_product(gaussian_product(a, b), c);
    const auto r = gaussian_product(a, gaussian_product(b, c));
    EXPECT_LE(rel_diff(l.precision(), r.precision()), 1e-12);
    EXPECT_LE(std::abs(l.mean() - r.mean()), 1e-12 * (std::abs(l.mean()) + std::sqrt(l.variance())));
  }
}

// Undoing a product cancels precision_b out of precision_a + precision_b, so
// the attainable accuracy is about eps * precision_b / precision_a. Keeping
// the ratio within 1e4 leaves room for the 1e-10 tolerance.
TEST_F(GaussianProperties, DivideUndoesProduct) {
  for (int i = 0; i < 2000; ++i) {
    const auto a = draw(2.0), b = draw(2.0);
    const auto back = gaussian_divide(gaussian_product(a, b), b);
    ASSERT_FALSE(back.is_flat());
    EXPECT_LE(rel_diff(back.variance(), a.variance()), 1e-10);
    EXPECT_LE(std::abs(back.mean() - a.mean()), 1e-10 * (std::abs(a.mean()) + std::sqrt(a.variance())));
  }
}

TEST_F(GaussianProperties, FlatIsExactIdentity) {
  for (int i = 0; i < 2000; ++i) {
    const auto a = draw(6.0);
    EXPECT_EQ(gaussian_product(a, GaussianMsg::flat()), a);
    const std::vector<GaussianMsg> mixed{GaussianMsg::flat(), a, GaussianMsg::flat()};
    EXPECT_EQ(gaussian_product(mixed), a);
    EXPECT_EQ(gaussian_divide(a, GaussianMsg::flat()), a);
    EXPECT_TRUE(gaussian_divide(a, a).is_flat());
  }
}

TEST_F(GaussianProperties, ProductNarrowsVariance) {
  for (int i = 0; i < 2000; ++i) {
    const auto a = draw(), b = draw();
    const auto p = gaussian_product(a, b);
    EXPECT_GT(p.variance(), 0.0);
    EXPECT_LE(p.variance(), std::min(a.variance(), b.variance()));
  }
}

}  // namespace
}  // namespace sbl
