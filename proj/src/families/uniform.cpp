#include "mpml/families/uniform.hpp"

#include <cmath>

namespace mpml {

FamilyFlags UniformFamily::flags() const {
  FamilyFlags f;
  f.factorizable = false;
  f.estimation_orthogonal = true;
  f.exponential_family = false;
  f.regular = false;
  f.has_ancillary_marginal = false;
  return f;
}

void UniformFamily::validate_data(const Dataset& data) const {
  validate_dataset_shape(data);
  if (max_of(data.x) == min_of(data.x)) {
    throw std::domain_error("uniform: degenerate data (zero range)");
  }
}

double UniformFamily::log_joint(const Dataset& data, const ParamPoint& theta) const {
  require_in_domain(theta);
  const double half = 1.0 / theta.psi;
  if (min_of(data.x) <= theta.lambda - half || max_of(data.x) >= theta.lambda + half) {
    return -kInf;  // outside the support: zero density
  }
  return data.n() * std::log(0.5 * theta.psi);
}

double UniformFamily::profile_lambda(const Dataset& data, double) const {
  return 0.5 * (min_of(data.x) + max_of(data.x));
}

double UniformFamily::jeffreys_log(const ParamPoint&) const {
  // Limit of the power-family convention: I ~ diag(psi^2, 1/psi^2), so the
  // determinant is constant.
  return 0.0;
}

double UniformFamily::pml_log(const Dataset&, double psi) const {
  // Formal midrange-ancillary treatment: pm(t | t, psi) proportional to psi.
  return -std::log(psi);
}

ParamPoint UniformFamily::rough_start(const Dataset& data) const {
  return accessors(data).mle;
}

Dataset UniformFamily::sample(CounterRng& rng, const ParamPoint& theta,
                              const DataShape& shape) const {
  Dataset d;
  d.x.reserve(shape.n);
  const double half = 1.0 / theta.psi;
  for (std::size_t i = 0; i < shape.n; ++i) {
    d.x.push_back(rng.uniform(theta.lambda - half, theta.lambda + half));
  }
  return d;
}

double UniformFamily::kl_per_obs(const ParamPoint& a, const ParamPoint& b) const {
  const double alo = a.lambda - 1.0 / a.psi, ahi = a.lambda + 1.0 / a.psi;
  const double blo = b.lambda - 1.0 / b.psi, bhi = b.lambda + 1.0 / b.psi;
  if (alo < blo || ahi > bhi) return kInf;
  return std::log(a.psi / b.psi) * -1.0;  // log(w_b / w_a)
}

UniformFamily::Accessors UniformFamily::accessors(const Dataset& data) {
  const double lo = min_of(data.x);
  const double hi = max_of(data.x);
  if (hi == lo) throw std::domain_error("uniform: degenerate data (zero range)");
  Accessors acc;
  acc.x_min = lo;
  acc.x_max = hi;
  acc.mle = ParamPoint{0.5 * (lo + hi), 2.0 / (hi - lo)};
  return acc;
}

double UniformFamily::post_mean_psi(const Dataset& data) {
  const Accessors acc = accessors(data);
  const double n = static_cast<double>(data.n());
  return 2.0 * (n - 1.0) / ((n + 1.0) * (acc.x_max - acc.x_min));
}

double UniformFamily::post_mean_lambda(const Dataset& data) {
  const Accessors acc = accessors(data);
  return 0.5 * (acc.x_min + acc.x_max);
}

}  // namespace mpml
