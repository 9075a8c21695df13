#pragma once

#include <complex>
#include <span>

namespace sbl {

using Complex = std::complex<double>;

/// Circularly-symmetric complex Gaussian CN(x; mean, variance).
///
/// Stored in natural coordinates: precision (1/variance) and the mean. A
/// precision of zero is the FLAT message (infinite variance, no information);
/// an infinite precision is a point mass. All products and quotients work on
/// precisions and precision-weighted means.
class GaussianMsg {
 public:
  /// FLAT.
  constexpr GaussianMsg() = default;

  /// Throws ContractViolation for a negative or NaN variance or a non-finite
  /// mean. variance == 0 gives a point mass; variance == +inf gives FLAT.
  static GaussianMsg from_moments(Complex mean, double variance);
  static GaussianMsg from_precision(Complex mean, double precision);
  static constexpr GaussianMsg flat() { return GaussianMsg(); }

  bool is_flat() const { return precision_ == 0.0; }
  bool is_point_mass() const;

  Complex mean() const { return mean_; }
  double precision() const { return precision_; }
  /// +inf for FLAT.
  double variance() const;

  friend bool operator==(const GaussianMsg&, const GaussianMsg&) = default;

 private:
  constexpr GaussianMsg(Complex mean, double precision)
      : mean_(mean), precision_(precision) {}

  Complex mean_{0.0, 0.0};
  double precision_ = 0.0;
};

/// Shape/rate Gamma density Ga(x; shape, rate).
struct GammaBelief {
  double shape = 1.0;
  double rate = 1.0;

  /// Throws ContractViolation unless both parameters are positive and finite.
  static GammaBelief make(double shape, double rate);

  double mean() const { return shape / rate; }
};

/// Product of Gaussian messages. FLAT members are ignored. Throws
/// NoInformation when every member is FLAT (or the list is empty).
GaussianMsg gaussian_product(std::span<const GaussianMsg> msgs);
GaussianMsg gaussian_product(const GaussianMsg& a, const GaussianMsg& b);

/// belief / msg. A non-positive resulting precision yields FLAT; dividing by
/// FLAT returns the belief unchanged. Throws ContractViolation for a FLAT
/// belief.
GaussianMsg gaussian_divide(const GaussianMsg& belief, const GaussianMsg& msg);

/// <|x|^2> = |mean|^2 + variance. Throws ContractViolation for FLAT.
double second_moment(const GaussianMsg& m);

}  // namespace sbl
