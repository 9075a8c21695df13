#include "sbl/gaussian.hpp"

#include <cmath>
#include <limits>

#include "sbl/errors.hpp"

namespace sbl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

GaussianMsg GaussianMsg::from_moments(Complex mean, double variance) {
  if (std::isnan(variance) || variance < 0.0) {
    throw ContractViolation("GaussianMsg: variance must be non-negative");
  }
  if (variance == kInf) return flat();
  if (!finite(mean)) throw ContractViolation("GaussianMsg: mean must be finite");
  return GaussianMsg(mean, variance == 0.0 ? kInf : 1.0 / variance);
}

GaussianMsg GaussianMsg::from_precision(Complex mean, double precision) {
  if (std::isnan(precision) || precision < 0.0) {
    throw ContractViolation("GaussianMsg: precision must be non-negative");
  }
  if (precision == 0.0) return flat();
  if (!finite(mean)) throw ContractViolation("GaussianMsg: mean must be finite");
  return GaussianMsg(mean, precision);
}

bool GaussianMsg::is_point_mass() const { return precision_ == kInf; }

double GaussianMsg::variance() const {
  if (is_flat()) return kInf;
  if (is_point_mass()) return 0.0;
  return 1.0 / precision_;
}

GammaBelief GammaBelief::make(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw ContractViolation("GammaBelief: shape and rate must be positive and finite");
  }
  return GammaBelief{shape, rate};
}

GaussianMsg gaussian_product(std::span<const GaussianMsg> msgs) {
  double precision = 0.0;
  Complex weighted{0.0, 0.0};
  const GaussianMsg* point = nullptr;
  const GaussianMsg* last = nullptr;
  int informative = 0;
  for (const auto& m : msgs) {
    if (m.is_flat()) continue;
    last = &m;
    ++informative;
    if (m.is_point_mass()) {
      if (point != nullptr && point->mean() != m.mean()) {
        throw ContractViolation("gaussian_product: incompatible point masses");
      }
      point = &m;
      continue;
    }
    precision += m.precision();
    weighted += m.precision() * m.mean();
  }
  if (point != nullptr) return *point;
  // A lone informative member passes through bit for bit.
  if (informative == 1) return *last;
  if (precision == 0.0) throw NoInformation("gaussian_product: all messages are FLAT");
  return GaussianMsg::from_precision(weighted / precision, precision);
}

GaussianMsg gaussian_product(const GaussianMsg& a, const GaussianMsg& b) {
  const GaussianMsg pair[2] = {a, b};
  return gaussian_product(pair);
}

GaussianMsg gaussian_divide(const GaussianMsg& belief, const GaussianMsg& msg) {
  if (belief.is_flat()) throw ContractViolation("gaussian_divide: FLAT belief");
  if (msg.is_flat()) return belief;
  if (belief.is_point_mass()) {
    return msg.is_point_mass() ? GaussianMsg::flat() : belief;
  }
  if (msg.is_point_mass()) return GaussianMsg::flat();

  const double precision = belief.precision() - msg.precision();
  // Anything within a few ulps of zero is cancellation noise.
  if (precision <= 4.0 * std::numeric_limits<double>::epsilon() * belief.precision()) {
    return GaussianMsg::flat();
  }
  const Complex weighted = belief.precision() * belief.mean() - msg.precision() * msg.mean();
  return GaussianMsg::from_precision(weighted / precision, precision);
}

double second_moment(const GaussianMsg& m) {
  if (m.is_flat()) throw ContractViolation("second_moment: FLAT message");
  return std::norm(m.mean()) + m.variance();
}

}  // namespace sbl
