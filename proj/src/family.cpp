#include "mpml/family.hpp"

#include <cmath>

#include "mpml/util/solve1d.hpp"

namespace mpml {

void Family::validate_data(const Dataset& data) const {
  validate_dataset_shape(data);
  const Interval sup = observation_support();
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    if (!sup.contains(data.x[i])) {
      throw std::domain_error(id() + ": observation " + std::to_string(i) +
                              " outside the support");
    }
  }
}

void Family::require_in_domain(const ParamPoint& theta) const {
  if (!domain().contains(theta)) {
    throw std::domain_error(id() + ": theta = (" + std::to_string(theta.lambda) +
                            ", " + std::to_string(theta.psi) +
                            ") outside the open parameter domain");
  }
}

std::function<double(double, double)> Family::bind_log_joint(const Dataset& data) const {
  auto copy = std::make_shared<Dataset>(data);
  return [this, copy](double lambda, double psi) {
    return log_joint(*copy, ParamPoint{lambda, psi});
  };
}

double Family::log_marginal_ancillary(double, const ParamPoint&, std::size_t) const {
  throw capability_error(id() + ": no marginal density of the ancillary statistic");
}

double Family::log_conditional(const Dataset&, double, double,
                               std::optional<double>) const {
  throw capability_error(id() + ": no conditional factorization");
}

double Family::ancillary(const Dataset& data) const {
  switch (ancillary_kind()) {
    case AncillaryKind::profile_mle: {
      // Estimation-orthogonal families: the profile maximizer at any psi.
      const double psi_ref = rough_start(data).psi;
      return profile_lambda(data, psi_ref);
    }
    case AncillaryKind::median:
      return median(data.x);
    case AncillaryKind::midrange:
      return 0.5 * (min_of(data.x) + max_of(data.x));
    case AncillaryKind::sum:
      return sum(data.x);
  }
  throw std::logic_error("unreachable ancillary kind");
}

double Family::profile_lambda(const Dataset& data, double psi) const {
  return generic_profile_lambda(*this, data, psi);
}

Mat2 Family::fisher_info(const ParamPoint&, double) const {
  throw capability_error(id() + ": Fisher information not defined (non-regular family)");
}

double Family::jeffreys_log(const ParamPoint& theta) const {
  const Mat2 info = fisher_info(theta, 1.0);
  if (!info.positive_definite()) {
    throw std::domain_error(id() + ": information matrix not positive definite");
  }
  return 0.5 * std::log(info.det());
}

std::pair<double, double> Family::canonical_of(const ParamPoint&) const {
  throw capability_error(id() + ": no canonical coordinates (not an exponential family)");
}

ParamPoint Family::from_canonical(double, double) const {
  throw capability_error(id() + ": no canonical coordinates (not an exponential family)");
}

std::pair<double, double> Family::canonical_at(const Dataset&,
                                               const ParamPoint& theta) const {
  return canonical_of(theta);
}

ParamPoint Family::from_canonical_at(const Dataset&, double xi, double psi) const {
  return from_canonical(xi, psi);
}

Interval Family::lambda_domain(const Dataset&) const { return domain().lambda; }

double Family::pml_log(const Dataset& data, double psi) const {
  if (!flags().has_ancillary_marginal) {
    throw capability_error(id() + ": no ancillary marginal for the profile prior");
  }
  const double t = ancillary(data);
  const double lam = profile_lambda(data, psi);
  return -log_marginal_ancillary(t, ParamPoint{lam, psi}, data.n());
}

std::function<double(double)> Family::bind_pml(const Dataset& data) const {
  auto copy = std::make_shared<Dataset>(data);
  return [this, copy](double psi) { return pml_log(*copy, psi); };
}

std::optional<CondExpStruct> Family::conditional_exp_structure(const Dataset&) const {
  return std::nullopt;
}

std::optional<I11Factorization> Family::i11_factorization() const { return std::nullopt; }

Transform1D Family::lambda_transform(const Dataset&) const {
  return Transform1D::for_interval(domain().lambda);
}

Transform1D Family::psi_transform() const {
  return Transform1D::for_interval(domain().psi);
}

double Family::kl_per_obs(const ParamPoint&, const ParamPoint&) const {
  throw capability_error(id() + ": no closed-form KL divergence");
}

double Family::kl_replicate(const ParamPoint& a, const ParamPoint& b,
                            const DataShape& shape) const {
  return static_cast<double>(shape.n) * kl_per_obs(a, b);
}

std::array<double, 2> Family::h_gradient(const Dataset&, const ParamPoint&) const {
  throw capability_error(id() + ": analytic derivatives unavailable");
}

Mat2 Family::h_hessian(const Dataset&, const ParamPoint&) const {
  throw capability_error(id() + ": analytic derivatives unavailable");
}

double Family::log_pdf_obs(double, const ParamPoint&) const {
  throw capability_error(id() + ": per-observation density unavailable");
}

Interval Family::observation_support() const { return Interval{-kInf, kInf}; }

double generic_profile_lambda(const Family& family, const Dataset& data, double psi) {
  const auto loglik = family.bind_log_joint(data);
  const Transform1D tf = family.lambda_transform(data);
  const Interval lam_dom = family.domain().lambda;
  const Interval u_dom = tf.u_domain(lam_dom);

  auto f = [&](double u) { return loglik(tf.x_of(u), psi); };
  const double start = family.rough_start(data).lambda;
  const double u0 = tf.u_of(start).value_or(0.0);
  const MaxResult res = maximize_scalar(f, u0, u_dom.lo, u_dom.hi, 1e-13, 300);
  if (!res.converged) {
    throw convergence_error(family.id() +
                            ": profile maximizer did not converge (|grad| = " +
                            std::to_string(res.grad_norm) + ")");
  }
  return tf.x_of(res.x);
}

}  // namespace mpml
