#include "mpml/families/two_binomial.hpp"

#include <algorithm>
#include <cmath>

#include "mpml/util/logspace.hpp"
#include "mpml/util/special.hpp"

namespace mpml {

namespace {

double log1pexp(double v) {
  if (v > 35.0) return v;
  if (v < -35.0) return std::exp(v);
  return std::log1p(std::exp(v));
}

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double bernoulli_kl(double pa, double pb) {
  double acc = 0.0;
  if (pa > 0.0) acc += pa * std::log(pa / pb);
  if (pa < 1.0) acc += (1.0 - pa) * std::log((1.0 - pa) / (1.0 - pb));
  return acc;
}

// log sum_u C(n,u) C(m,t-u) e^{u psi} over the conditional support.
double log_conditional_normalizer(int n, int m, int t, double psi) {
  const int lo = std::max(0, t - m);
  const int hi = std::min(n, t);
  std::vector<double> terms;
  terms.reserve(hi - lo + 1);
  for (int u = lo; u <= hi; ++u) {
    terms.push_back(log_binom(n, u) + log_binom(m, t - u) + u * psi);
  }
  return log_sum_exp(terms);
}

}  // namespace

FamilyFlags TwoBinomialFamily::flags() const {
  FamilyFlags f;
  f.factorizable = true;
  f.estimation_orthogonal = true;
  f.exponential_family = true;
  f.regular = true;
  f.has_ancillary_marginal = true;
  return f;
}

TwoBinomialFamily::Counts TwoBinomialFamily::counts_of(const Dataset& data) {
  if (!data.z) {
    throw std::domain_error("two-binomial: binary covariate column required");
  }
  Counts c;
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    const double zi = (*data.z)[i];
    const int xi = static_cast<int>(data.x[i]);
    if ((data.x[i] != 0.0 && data.x[i] != 1.0) || (zi != 0.0 && zi != 1.0)) {
      throw std::domain_error("two-binomial: observations and covariates must be 0/1");
    }
    if (zi == 1.0) {
      c.n += 1;
      c.x += xi;
    } else {
      c.m += 1;
      c.y += xi;
    }
  }
  if (c.n == 0 || c.m == 0) {
    throw std::domain_error("two-binomial: both covariate groups must be present");
  }
  return c;
}

Dataset TwoBinomialFamily::dataset_from_counts(int x, int n, int y, int m) {
  Dataset d;
  d.z = std::vector<double>();
  for (int i = 0; i < n; ++i) {
    d.x.push_back(i < x ? 1.0 : 0.0);
    d.z->push_back(1.0);
  }
  for (int i = 0; i < m; ++i) {
    d.x.push_back(i < y ? 1.0 : 0.0);
    d.z->push_back(0.0);
  }
  return d;
}

void TwoBinomialFamily::validate_data(const Dataset& data) const {
  validate_dataset_shape(data);
  counts_of(data);
}

TwoBinomialFamily::Probs TwoBinomialFamily::probs_at_alpha(double alpha, double psi) {
  return Probs{logistic(alpha + psi), logistic(alpha), alpha};
}

TwoBinomialFamily::Probs TwoBinomialFamily::probs_at(const ParamPoint& theta,
                                                     int n, int m) {
  const double lambda = theta.lambda;
  const double total = static_cast<double>(n + m);
  if (!(lambda > 0.0) || !(lambda < total)) {
    throw std::domain_error("two-binomial: lambda must lie in (0, n + m)");
  }
  // Solve n p(alpha + psi) + m q(alpha) = lambda; strictly increasing in
  // alpha. Newton with a bisection safeguard so saturated logistics at
  // extreme psi cannot derail the iteration.
  auto mean_t = [&](double a) {
    return n * logistic(a + theta.psi) + m * logistic(a);
  };
  double lo = -760.0, hi = 760.0;
  double alpha = std::log(lambda / (total - lambda));
  alpha = std::clamp(alpha, lo + 1.0, hi - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double p = logistic(alpha + theta.psi);
    const double q = logistic(alpha);
    const double f = n * p + m * q - lambda;
    if (f > 0.0) hi = alpha; else lo = alpha;
    const double fp = n * p * (1.0 - p) + m * q * (1.0 - q);
    double next = alpha - f / std::max(fp, 1e-300);
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::fabs(next - alpha) < 1e-15 * (1.0 + std::fabs(alpha))) {
      alpha = next;
      break;
    }
    alpha = next;
  }
  (void)mean_t;
  return probs_at_alpha(alpha, theta.psi);
}

double TwoBinomialFamily::log_joint(const Dataset& data, const ParamPoint& theta) const {
  const Counts c = counts_of(data);
  const Probs pr = probs_at(theta, c.n, c.m);
  return log_binom(c.n, c.x) + log_binom(c.m, c.y) + c.x * (pr.alpha + theta.psi) +
         c.y * pr.alpha - c.n * log1pexp(pr.alpha + theta.psi) -
         c.m * log1pexp(pr.alpha);
}

std::function<double(double, double)> TwoBinomialFamily::bind_log_joint(
    const Dataset& data) const {
  const Counts c = counts_of(data);
  const double lc = log_binom(c.n, c.x) + log_binom(c.m, c.y);
  return [c, lc](double lambda, double psi) {
    const Probs pr = probs_at(ParamPoint{lambda, psi}, c.n, c.m);
    return lc + c.x * (pr.alpha + psi) + c.y * pr.alpha -
           c.n * log1pexp(pr.alpha + psi) - c.m * log1pexp(pr.alpha);
  };
}

double TwoBinomialFamily::log_marginal_ancillary(double t, const ParamPoint& theta,
                                                 std::size_t n_total) const {
  (void)n_total;
  throw capability_error(
      "two-binomial: the marginal of t needs group sizes; use the dataset overloads");
}

double TwoBinomialFamily::log_conditional(const Dataset& data, double t, double psi,
                                          std::optional<double> lambda) const {
  if (lambda.has_value()) {
    throw capability_error("two-binomial: lambda-dependent conditional split not available");
  }
  const Counts c = counts_of(data);
  const int ti = static_cast<int>(std::lround(t));
  if (ti != c.t()) {
    throw std::domain_error("two-binomial: conditioning value must equal x + y");
  }
  return binomial_conditional_loglik(c.x, c.n, c.y, c.m, psi);
}

double TwoBinomialFamily::profile_lambda(const Dataset& data, double) const {
  // The score in lambda is t - E[t]; the maximizer is t for every psi.
  return static_cast<double>(counts_of(data).t());
}

Mat2 TwoBinomialFamily::fisher_info_counts(const ParamPoint& theta, int n, int m) {
  const Probs pr = probs_at(theta, n, m);
  const double v1 = n * pr.p * (1.0 - pr.p);
  const double v0 = m * pr.q * (1.0 - pr.q);
  Mat2 info;
  info.a11 = 1.0 / (v1 + v0);
  info.a12 = 0.0;
  info.a22 = v1 * v0 / (v1 + v0);
  return info;
}

Mat2 TwoBinomialFamily::fisher_info(const ParamPoint& theta, double n) const {
  // Data-free surface assumes balanced groups of size n each; dataset-aware
  // callers should use fisher_info_counts.
  const int half = std::max(1, static_cast<int>(std::lround(n)));
  return fisher_info_counts(theta, half, half);
}

std::pair<double, double> TwoBinomialFamily::canonical_of(const ParamPoint&) const {
  throw capability_error(
      "two-binomial: canonical coordinates need group sizes; use canonical_at");
}

ParamPoint TwoBinomialFamily::from_canonical(double, double) const {
  throw capability_error(
      "two-binomial: canonical coordinates need group sizes; use canonical_at");
}

std::pair<double, double> TwoBinomialFamily::canonical_at(const Dataset& data,
                                                          const ParamPoint& theta) const {
  const Counts c = counts_of(data);
  return {probs_at(theta, c.n, c.m).alpha, theta.psi};
}

ParamPoint TwoBinomialFamily::from_canonical_at(const Dataset& data, double xi,
                                                double psi) const {
  const Counts c = counts_of(data);
  const Probs pr = probs_at_alpha(xi, psi);
  return ParamPoint{c.n * pr.p + c.m * pr.q, psi};
}

std::optional<CondExpStruct> TwoBinomialFamily::conditional_exp_structure(
    const Dataset& data) const {
  const Counts c = counts_of(data);
  CondExpStruct ces;
  ces.u = static_cast<double>(c.x);
  const int n = c.n, m = c.m, t = c.t();
  ces.B = [n, m, t](double psi) { return log_conditional_normalizer(n, m, t, psi); };
  // Conditional mean and variance of x given t.
  auto moments = [n, m, t](double psi) {
    const int lo = std::max(0, t - m);
    const int hi = std::min(n, t);
    const double lz = log_conditional_normalizer(n, m, t, psi);
    double mu = 0.0, m2 = 0.0;
    for (int u = lo; u <= hi; ++u) {
      const double w = std::exp(log_binom(n, u) + log_binom(m, t - u) + u * psi - lz);
      mu += w * u;
      m2 += w * u * u;
    }
    return std::pair<double, double>(mu, m2 - mu * mu);
  };
  ces.Bp = [moments](double psi) { return moments(psi).first; };
  ces.Bpp = [moments](double psi) { return moments(psi).second; };
  return ces;
}

Transform1D TwoBinomialFamily::lambda_transform(const Dataset& data) const {
  const Counts c = counts_of(data);
  return Transform1D::bounded_tf(0.0, static_cast<double>(c.n + c.m));
}

Interval TwoBinomialFamily::lambda_domain(const Dataset& data) const {
  const Counts c = counts_of(data);
  return Interval{0.0, static_cast<double>(c.n + c.m)};
}

ParamPoint TwoBinomialFamily::rough_start(const Dataset& data) const {
  const Counts c = counts_of(data);
  const double p = (c.x + 0.5) / (c.n + 1.0);
  const double q = (c.y + 0.5) / (c.m + 1.0);
  const double psi = std::log(p / (1.0 - p)) - std::log(q / (1.0 - q));
  double lambda = static_cast<double>(c.t());
  lambda = std::clamp(lambda, 0.25, c.n + c.m - 0.25);
  return ParamPoint{lambda, psi};
}

Dataset TwoBinomialFamily::sample(CounterRng& rng, const ParamPoint& theta,
                                  const DataShape& shape) const {
  if (!shape.z) {
    throw std::domain_error("two-binomial: sampling requires a covariate pattern");
  }
  int n = 0, m = 0;
  for (double zi : *shape.z) (zi == 1.0 ? n : m) += 1;
  const Probs pr = probs_at(theta, n, m);
  Dataset d;
  d.z = shape.z;
  d.x.reserve(shape.n);
  for (double zi : *shape.z) {
    d.x.push_back(static_cast<double>(rng.bernoulli(zi == 1.0 ? pr.p : pr.q)));
  }
  return d;
}

double TwoBinomialFamily::kl_per_obs(const ParamPoint&, const ParamPoint&) const {
  throw capability_error("two-binomial: KL needs the covariate pattern; use kl_replicate");
}

double TwoBinomialFamily::kl_replicate(const ParamPoint& a, const ParamPoint& b,
                                       const DataShape& shape) const {
  if (!shape.z) {
    throw std::domain_error("two-binomial: KL requires a covariate pattern");
  }
  int n = 0, m = 0;
  for (double zi : *shape.z) (zi == 1.0 ? n : m) += 1;
  const Probs pa = probs_at(a, n, m);
  const Probs pb = probs_at(b, n, m);
  return n * bernoulli_kl(pa.p, pb.p) + m * bernoulli_kl(pa.q, pb.q);
}

double binomial_conditional_loglik(int x, int n, int y, int m, double psi) {
  if (x < 0 || x > n || y < 0 || y > m) {
    throw std::domain_error("two-binomial: counts outside their ranges");
  }
  const int t = x + y;
  const int lo = std::max(0, t - m);
  const int hi = std::min(n, t);
  if (lo > hi) throw std::domain_error("two-binomial: empty conditional support");
  return log_binom(n, x) + log_binom(m, y) + x * psi -
         log_conditional_normalizer(n, m, t, psi);
}

}  // namespace mpml
