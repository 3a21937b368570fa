#include "mpml/families/location_scale.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "mpml/quadrature.hpp"
#include "mpml/util/solve1d.hpp"
#include "mpml/util/special.hpp"

namespace mpml {

FamilyFlags LocationScaleFamily::flags() const {
  FamilyFlags f;
  f.factorizable = false;
  f.estimation_orthogonal = true;
  f.exponential_family = false;
  f.regular = spec_.regular;
  f.has_ancillary_marginal = true;
  return f;
}

double LocationScaleFamily::log_joint(const Dataset& data, const ParamPoint& theta) const {
  require_in_domain(theta);
  const double n = static_cast<double>(data.n());
  double acc = n * (spec_.log_C + std::log(theta.psi));
  for (double xi : data.x) acc += spec_.log_g(theta.psi * (xi - theta.lambda));
  if (!std::isfinite(acc)) {
    throw std::domain_error(id() + ": non-finite joint log-density");
  }
  return acc;
}

std::function<double(double, double)> LocationScaleFamily::bind_log_joint(
    const Dataset& data) const {
  auto xs = std::make_shared<std::vector<double>>(data.x);
  const LocationScaleSpec* sp = &spec_;
  return [xs, sp](double lambda, double psi) {
    double acc = xs->size() * (sp->log_C + std::log(psi));
    for (double xi : *xs) acc += sp->log_g(psi * (xi - lambda));
    return acc;
  };
}

double LocationScaleFamily::log_marginal_ancillary(double t, const ParamPoint& theta,
                                                   std::size_t n) const {
  return median_marginal_logpdf(spec_, t, theta, n);
}

double LocationScaleFamily::profile_lambda(const Dataset& data, double) const {
  return spec_.location_estimate(data);
}

Mat2 LocationScaleFamily::fisher_info(const ParamPoint& theta, double n) const {
  require_in_domain(theta);
  // For the Laplace member this is the limiting convention (the correlation
  // matrix of the score), which coincides with the power-family closed form
  // continued to r = 1.
  Mat2 info;
  info.a11 = n * spec_.j1 * theta.psi * theta.psi;
  info.a12 = 0.0;
  info.a22 = n * spec_.j2 / (theta.psi * theta.psi);
  return info;
}

double LocationScaleFamily::pml_log(const Dataset& data, double psi) const {
  // The marginal of the median is maximized over lambda at the median itself,
  // so the profile value only sees psi through the leading psi factor.
  const double t = median(data.x);
  return -median_marginal_logpdf(spec_, t, ParamPoint{t, psi}, data.n());
}

ParamPoint LocationScaleFamily::rough_start(const Dataset& data) const {
  const double lam = spec_.location_estimate(data);
  return ParamPoint{lam, spec_.psi_mle_given_lambda(data, lam)};
}

Dataset LocationScaleFamily::sample(CounterRng& rng, const ParamPoint& theta,
                                    const DataShape& shape) const {
  Dataset d;
  d.x.reserve(shape.n);
  for (std::size_t i = 0; i < shape.n; ++i) {
    d.x.push_back(theta.lambda + spec_.draw_z(rng) / theta.psi);
  }
  return d;
}

double LocationScaleFamily::log_pdf_obs(double x, const ParamPoint& theta) const {
  return spec_.log_C + std::log(theta.psi) +
         spec_.log_g(theta.psi * (x - theta.lambda));
}

double median_marginal_logpdf(const LocationScaleSpec& spec, double t_med,
                              const ParamPoint& theta, std::size_t n) {
  const double a = theta.psi * (t_med - theta.lambda);
  if (n % 2 == 1) {
    const double m = 0.5 * (static_cast<double>(n) - 1.0);
    const double Ga = spec.G(a);
    return lgamma_fn(n + 1.0) - 2.0 * lgamma_fn(m + 1.0) + m * std::log(Ga) +
           m * std::log1p(-Ga) + std::log(theta.psi) + spec.log_C + spec.log_g(a);
  }
  // Even n = 2m: reduce the joint density of the two central order statistics
  // along the anti-diagonal. The substitution s = psi * w leaves a psi-free
  // integral of the standardized base, so the value is exactly proportional
  // to psi at t_med = lambda.
  const double m = 0.5 * static_cast<double>(n);
  auto log_h = [&](double s) {
    const double gl = spec.G(a - s);
    const double gr = spec.G(a + s);
    if (gl <= 0.0 || gr >= 1.0) return -kInf;
    return (m - 1.0) * std::log(gl) + spec.log_g(a - s) + spec.log_g(a + s) +
           (m - 1.0) * std::log1p(-gr);
  };
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-10;
  const Quad1DResult h = integrate_1d(log_h, Interval{0.0, kInf}, cfg, 0.0,
                                      Transform1D::identity_tf(), "median pair integral");
  return std::log(2.0) + lgamma_fn(n + 1.0) - 2.0 * lgamma_fn(m) +
         2.0 * spec.log_C + std::log(theta.psi) + h.log_value;
}

LocationScaleSpec laplace_spec() {
  LocationScaleSpec s;
  s.id = "laplace";
  s.log_g = [](double z) { return -std::fabs(z); };
  s.log_C = std::log(0.5);
  s.G = [](double z) {
    return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
  };
  s.regular = false;  // information carried by the limiting convention
  s.j1 = 1.0;
  s.j2 = 1.0;
  s.draw_z = [](CounterRng& rng) {
    const double e = rng.exponential();
    return rng.uniform() < 0.5 ? -e : e;
  };
  s.location_estimate = [](const Dataset& d) { return median(d.x); };
  s.psi_mle_given_lambda = [](const Dataset& d, double lam) {
    double acc = 0.0;
    for (double xi : d.x) acc += std::fabs(xi - lam);
    if (acc <= 0.0) return 1.0;
    return static_cast<double>(d.n()) / acc;
  };
  return s;
}

LocationScaleSpec exponential_power_spec(double r) {
  if (!(r > 1.0)) {
    throw config_error("exponential power exponent must exceed 1");
  }
  LocationScaleSpec s;
  s.id = "exppower:" + std::to_string(r);
  s.log_g = [r](double z) { return -std::pow(std::fabs(z), r); };
  // C = r / (2 Gamma(1/r)) normalizes C g.
  s.log_C = std::log(r) - std::log(2.0) - lgamma_fn(1.0 / r);
  s.G = [r](double z) {
    const double p = 0.5 * boost::math::gamma_p(1.0 / r, std::pow(std::fabs(z), r));
    return z < 0.0 ? 0.5 - p : 0.5 + p;
  };
  s.r = r;
  s.regular = true;
  s.j1 = r * r * std::exp(lgamma_fn(2.0 - 1.0 / r) - lgamma_fn(1.0 / r));
  s.j2 = r;
  s.draw_z = [r](CounterRng& rng) {
    const double y = rng.gamma(1.0 / r);
    const double z = std::pow(y, 1.0 / r);
    return rng.uniform() < 0.5 ? -z : z;
  };
  s.location_estimate = [r](const Dataset& d) {
    auto obj = [&](double lam) {
      double acc = 0.0;
      for (double xi : d.x) acc -= std::pow(std::fabs(xi - lam), r);
      return acc;
    };
    const MaxResult res =
        maximize_scalar(obj, median(d.x), min_of(d.x), max_of(d.x), 1e-13, 300,
                        /*expand=*/false);
    return res.x;
  };
  s.psi_mle_given_lambda = [r](const Dataset& d, double lam) {
    double acc = 0.0;
    for (double xi : d.x) acc += std::pow(std::fabs(xi - lam), r);
    if (acc <= 0.0) return 1.0;
    return std::pow(static_cast<double>(d.n()) / (r * acc), 1.0 / r);
  };
  return s;
}

LocationScaleSpec normal_base_spec() {
  LocationScaleSpec s;
  s.id = "ls-normal";
  s.log_g = [](double z) { return -0.5 * z * z; };
  s.log_C = -kHalfLogTwoPi;
  s.G = [](double z) { return normal_cdf(z); };
  s.regular = true;
  s.j1 = 1.0;
  s.j2 = 2.0;
  s.draw_z = [](CounterRng& rng) { return rng.normal(); };
  s.location_estimate = [](const Dataset& d) { return mean(d.x); };
  s.psi_mle_given_lambda = [](const Dataset& d, double lam) {
    double acc = 0.0;
    for (double xi : d.x) acc += (xi - lam) * (xi - lam);
    if (acc <= 0.0) return 1.0;
    return std::sqrt(static_cast<double>(d.n()) / acc);
  };
  return s;
}

}  // namespace mpml
