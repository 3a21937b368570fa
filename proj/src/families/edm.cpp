#include "mpml/families/edm.hpp"

#include <cmath>

#include "mpml/util/special.hpp"

namespace mpml {

FamilyFlags EdmFamily::flags() const {
  FamilyFlags f;
  f.factorizable = true;
  f.estimation_orthogonal = true;
  f.exponential_family = true;
  f.regular = true;
  f.has_ancillary_marginal = true;
  return f;
}

EdmFamily::Stats EdmFamily::stats(const Dataset& data) const {
  Stats s;
  s.n = data.n();
  for (double xi : data.x) {
    s.t1 += xi;
    s.tn += spec_.N(xi);
    s.ta += spec_.log_a(xi);
  }
  s.xbar = s.t1 / static_cast<double>(s.n);
  return s;
}

double EdmFamily::log_joint(const Dataset& data, const ParamPoint& theta) const {
  require_in_domain(theta);
  const Stats s = stats(data);
  const double eta = spec_.c(theta.lambda);
  const double v = theta.psi * (s.t1 * eta - s.n * spec_.M(eta) - s.tn) + s.ta +
                   s.n * spec_.k(theta.psi);
  if (!std::isfinite(v)) {
    throw std::domain_error(id() + ": non-finite joint log-density");
  }
  return v;
}

std::function<double(double, double)> EdmFamily::bind_log_joint(const Dataset& data) const {
  const Stats s = stats(data);
  const EdmSpec* sp = &spec_;
  return [s, sp](double lambda, double psi) {
    const double eta = sp->c(lambda);
    return psi * (s.t1 * eta - s.n * sp->M(eta) - s.tn) + s.ta +
           s.n * sp->k(psi);
  };
}

double EdmFamily::log_marginal_ancillary(double t, const ParamPoint& theta,
                                         std::size_t n) const {
  require_in_domain(theta);
  if (!spec_.obs_support.contains(t)) {
    throw std::domain_error(id() + ": ancillary value outside its support");
  }
  const double eta = spec_.c(theta.lambda);
  const double npsi = static_cast<double>(n) * theta.psi;
  return npsi * (t * eta - spec_.M(eta) - spec_.N(t)) + spec_.log_a(t) +
         spec_.k(npsi);
}

double EdmFamily::log_conditional(const Dataset& data, double t, double psi,
                                  std::optional<double> lambda) const {
  if (lambda.has_value()) {
    throw capability_error(id() + ": lambda-dependent conditional split not available");
  }
  const Stats s = stats(data);
  const double n = static_cast<double>(s.n);
  const double npsi = n * psi;
  return psi * (n * spec_.N(t) - s.tn) + s.ta - spec_.log_a(t) +
         n * spec_.k(psi) - spec_.k(npsi);
}

double EdmFamily::profile_lambda(const Dataset& data, double) const {
  // The score in lambda is psi c'(lambda) (sum x_i - n lambda): the maximizer
  // is the sample mean for every psi.
  return mean(data.x);
}

Mat2 EdmFamily::fisher_info(const ParamPoint& theta, double n) const {
  require_in_domain(theta);
  Mat2 info;
  info.a11 = n * theta.psi * spec_.c1(theta.lambda);
  info.a12 = 0.0;
  info.a22 = -n * spec_.k2(theta.psi);
  return info;
}

std::pair<double, double> EdmFamily::canonical_of(const ParamPoint& theta) const {
  require_in_domain(theta);
  return {theta.psi * spec_.c(theta.lambda), theta.psi};
}

ParamPoint EdmFamily::from_canonical(double xi, double psi) const {
  return ParamPoint{spec_.c_inv(xi / psi), psi};
}

double EdmFamily::pml_log(const Dataset& data, double psi) const {
  // At lambda = xbar the exponent of the marginal factor vanishes by
  // conjugacy, leaving a(xbar) exp k(n psi).
  const double npsi = static_cast<double>(data.n()) * psi;
  return -(spec_.k(npsi) + spec_.log_a(mean(data.x)));
}

std::function<double(double)> EdmFamily::bind_pml(const Dataset& data) const {
  const double n = static_cast<double>(data.n());
  const double la = spec_.log_a(mean(data.x));
  const EdmSpec* sp = &spec_;
  return [n, la, sp](double psi) { return -(sp->k(n * psi) + la); };
}

std::optional<CondExpStruct> EdmFamily::conditional_exp_structure(const Dataset& data) const {
  const Stats s = stats(data);
  const double n = static_cast<double>(s.n);
  CondExpStruct ces;
  ces.u = n * spec_.N(s.xbar) - s.tn;
  const EdmSpec* sp = &spec_;
  ces.B = [n, sp](double psi) { return sp->k(n * psi) - n * sp->k(psi); };
  ces.Bp = [n, sp](double psi) { return n * sp->k1(n * psi) - n * sp->k1(psi); };
  ces.Bpp = [n, sp](double psi) {
    return n * n * sp->k2(n * psi) - n * sp->k2(psi);
  };
  return ces;
}

std::optional<I11Factorization> EdmFamily::i11_factorization() const {
  const EdmSpec* sp = &spec_;
  return I11Factorization{[sp](double lambda) { return sp->c1(lambda); },
                          [](double psi) { return psi; }};
}

ParamPoint EdmFamily::rough_start(const Dataset& data) const {
  return ParamPoint{mean(data.x), spec_.rough_psi(data)};
}

Dataset EdmFamily::sample(CounterRng& rng, const ParamPoint& theta,
                          const DataShape& shape) const {
  Dataset d;
  d.x.reserve(shape.n);
  for (std::size_t i = 0; i < shape.n; ++i) d.x.push_back(spec_.draw(rng, theta));
  return d;
}

double EdmFamily::kl_per_obs(const ParamPoint& a, const ParamPoint& b) const {
  if (!spec_.kl_obs) return Family::kl_per_obs(a, b);
  return spec_.kl_obs(a, b);
}

double EdmFamily::log_pdf_obs(double x, const ParamPoint& theta) const {
  const double eta = spec_.c(theta.lambda);
  return theta.psi * (x * eta - spec_.M(eta) - spec_.N(x)) + spec_.log_a(x) +
         spec_.k(theta.psi);
}

std::array<double, 2> EdmFamily::h_gradient(const Dataset& data,
                                            const ParamPoint& theta) const {
  const Stats s = stats(data);
  const double n = static_cast<double>(s.n);
  const double lam = theta.lambda, psi = theta.psi;
  const double resid = s.t1 - n * lam;
  const double eta = spec_.c(lam);
  return {-(psi / n) * spec_.c1(lam) * resid,
          -(s.t1 * eta - n * spec_.M(eta) - s.tn) / n - spec_.k1(psi)};
}

Mat2 EdmFamily::h_hessian(const Dataset& data, const ParamPoint& theta) const {
  const Stats s = stats(data);
  const double n = static_cast<double>(s.n);
  const double lam = theta.lambda, psi = theta.psi;
  const double resid = s.t1 - n * lam;
  Mat2 h;
  h.a11 = -(psi / n) * spec_.c2(lam) * resid + psi * spec_.c1(lam);
  h.a12 = -spec_.c1(lam) * resid / n;
  h.a22 = -spec_.k2(psi);
  return h;
}

Tensor3Sym EdmFamily::h_third(const Dataset& data, const ParamPoint& theta) const {
  const Stats s = stats(data);
  const double n = static_cast<double>(s.n);
  const double lam = theta.lambda, psi = theta.psi;
  const double resid = s.t1 - n * lam;
  Tensor3Sym t;
  t.t000 = -(psi / n) * spec_.c3(lam) * resid + 2.0 * psi * spec_.c2(lam);
  t.t001 = -spec_.c2(lam) * resid / n + spec_.c1(lam);
  t.t011 = 0.0;
  t.t111 = -spec_.k3(psi);
  return t;
}

EdmSpec normal_spec() {
  EdmSpec s;
  s.id = "normal";
  s.lambda_domain = Interval{-kInf, kInf};
  s.obs_support = Interval{-kInf, kInf};
  s.c = [](double l) { return l; };
  s.c1 = [](double) { return 1.0; };
  s.c2 = [](double) { return 0.0; };
  s.c3 = [](double) { return 0.0; };
  s.c_inv = [](double e) { return e; };
  s.M = [](double e) { return 0.5 * e * e; };
  s.M1 = [](double e) { return e; };
  s.N = [](double x) { return 0.5 * x * x; };
  s.log_a = [](double) { return -kHalfLogTwoPi; };
  s.k = [](double p) { return 0.5 * std::log(p); };
  s.k1 = [](double p) { return 0.5 / p; };
  s.k2 = [](double p) { return -0.5 / (p * p); };
  s.k3 = [](double p) { return 1.0 / (p * p * p); };
  s.draw = [](CounterRng& rng, const ParamPoint& th) {
    return rng.normal(th.lambda, 1.0 / std::sqrt(th.psi));
  };
  s.kl_obs = [](const ParamPoint& a, const ParamPoint& b) {
    return 0.5 * (b.psi / a.psi + b.psi * (a.lambda - b.lambda) * (a.lambda - b.lambda) -
                  1.0 + std::log(a.psi / b.psi));
  };
  s.rough_psi = [](const Dataset& d) {
    const double ss = centered_sumsq(d.x);
    if (ss <= 0.0) return 1.0;
    return static_cast<double>(d.n()) / ss;
  };
  return s;
}

EdmSpec gamma_spec() {
  EdmSpec s;
  s.id = "gamma";
  s.lambda_domain = Interval{0.0, kInf};
  s.obs_support = Interval{0.0, kInf};
  s.c = [](double l) { return -1.0 / l; };
  s.c1 = [](double l) { return 1.0 / (l * l); };
  s.c2 = [](double l) { return -2.0 / (l * l * l); };
  s.c3 = [](double l) { return 6.0 / (l * l * l * l); };
  s.c_inv = [](double e) { return -1.0 / e; };
  s.M = [](double e) { return -std::log(-e); };
  s.M1 = [](double e) { return -1.0 / e; };
  s.N = [](double x) { return -1.0 - std::log(x); };
  s.log_a = [](double x) { return -std::log(x); };
  s.k = [](double p) { return p * std::log(p) - p - lgamma_fn(p); };
  s.k1 = [](double p) { return std::log(p) - digamma_fn(p); };
  s.k2 = [](double p) { return 1.0 / p - trigamma_fn(p); };
  s.k3 = [](double p) { return -1.0 / (p * p) - polygamma2_fn(p); };
  s.draw = [](CounterRng& rng, const ParamPoint& th) {
    return rng.gamma_mean_shape(th.lambda, th.psi);
  };
  s.kl_obs = [](const ParamPoint& a, const ParamPoint& b) {
    // Shape/rate form with alpha_i = psi_i, beta_i = psi_i / lambda_i.
    const double la = std::log(a.psi / a.lambda), lb = std::log(b.psi / b.lambda);
    return (a.psi - b.psi) * digamma_fn(a.psi) - lgamma_fn(a.psi) + lgamma_fn(b.psi) +
           b.psi * (la - lb) + a.psi * (b.psi / b.lambda - a.psi / a.lambda) /
                                   (a.psi / a.lambda);
  };
  s.rough_psi = [](const Dataset& d) {
    const double m = mean(d.x);
    double var = centered_sumsq(d.x) / std::max<double>(1, d.n() - 1);
    if (var <= 0.0) var = 0.1 * m * m + 1e-8;
    return std::max(1e-3, m * m / var);
  };
  return s;
}

EdmSpec inverse_gaussian_spec() {
  EdmSpec s;
  s.id = "invgauss";
  s.lambda_domain = Interval{0.0, kInf};
  s.obs_support = Interval{0.0, kInf};
  s.c = [](double l) { return -0.5 / (l * l); };
  s.c1 = [](double l) { return 1.0 / (l * l * l); };
  s.c2 = [](double l) { return -3.0 / (l * l * l * l); };
  s.c3 = [](double l) { return 12.0 / (l * l * l * l * l); };
  s.c_inv = [](double e) { return std::sqrt(-0.5 / e); };
  s.M = [](double e) { return -std::sqrt(-2.0 * e); };
  s.M1 = [](double e) { return 1.0 / std::sqrt(-2.0 * e); };
  s.N = [](double x) { return 0.5 / x; };
  s.log_a = [](double x) { return -0.5 * (kLogTwoPi + 3.0 * std::log(x)); };
  s.k = [](double p) { return 0.5 * std::log(p); };
  s.k1 = [](double p) { return 0.5 / p; };
  s.k2 = [](double p) { return -0.5 / (p * p); };
  s.k3 = [](double p) { return 1.0 / (p * p * p); };
  s.draw = [](CounterRng& rng, const ParamPoint& th) {
    return rng.inverse_gaussian(th.lambda, th.psi);
  };
  s.kl_obs = [](const ParamPoint& a, const ParamPoint& b) {
    // E_a[x] = lambda_a, E_a[1/x] = 1/lambda_a + 1/psi_a.
    const double la = a.lambda, lb = b.lambda;
    return 0.5 * std::log(a.psi / b.psi) - 0.5 +
           b.psi * (la / (2.0 * lb * lb) - 1.0 / lb + 0.5 / la + 0.5 / a.psi);
  };
  s.rough_psi = [](const Dataset& d) {
    const double m = mean(d.x);
    double acc = 0.0;
    for (double xi : d.x) acc += 1.0 / xi;
    const double denom = acc - static_cast<double>(d.n()) / m;
    if (denom <= 0.0) return 1.0;
    return static_cast<double>(d.n()) / denom;
  };
  return s;
}

FamilyFlags NormalFamily::flags() const {
  FamilyFlags f = EdmFamily::flags();
  f.marginal_mle_split = true;
  return f;
}

double NormalFamily::log_marginal_split_stat(double t, double psi,
                                             std::size_t n) const {
  if (!(t > 0.0)) throw std::domain_error("normal: split statistic must be positive");
  const double a = 0.5 * static_cast<double>(n - 1);
  return a * std::log(psi) + (a - 1.0) * std::log(t) - 0.5 * psi * t -
         a * std::log(2.0) - lgamma_fn(a);
}

double NormalFamily::log_conditional(const Dataset& data, double t, double psi,
                                     std::optional<double> lambda) const {
  if (!lambda.has_value()) return EdmFamily::log_conditional(data, t, psi, std::nullopt);
  // Alternative split: condition on t = centered sum of squares, whose
  // marginal is free of lambda.
  return log_joint(data, ParamPoint{*lambda, psi}) -
         log_marginal_split_stat(t, psi, data.n());
}

double NormalFamily::marginal_pml_log(const Dataset& data, double psi) const {
  const double t = centered_sumsq(data.x);
  const double lam_hat = mean(data.x);
  return -log_conditional(data, t, psi, lam_hat);
}

}  // namespace mpml
