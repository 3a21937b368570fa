#include "mpml/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "mpml/families/edm.hpp"
#include "mpml/families/location_scale.hpp"
#include "mpml/families/two_binomial.hpp"
#include "mpml/families/uniform.hpp"
#include "mpml/util/fd.hpp"
#include "mpml/util/solve1d.hpp"

namespace mpml {

namespace {

// Maximize the conditional structure psi * u - B(psi) over the psi domain.
CmlResult solve_conditional(const CondExpStruct& ces, const Interval& psi_dom,
                            double psi0) {
  auto score = [&](double psi) { return ces.u - ces.Bp(psi); };
  auto dscore = [&](double psi) { return -ces.Bpp(psi); };
  const bool positive_axis = psi_dom.is_positive_halfline();
  double lo = positive_axis ? 0.5 * psi0 : psi0 - 1.0;
  double hi = positive_axis ? 2.0 * psi0 : psi0 + 1.0;
  if (!expand_bracket(score, lo, hi, positive_axis)) {
    // Score never changes sign: the maximizer sits at an infinite boundary.
    CmlResult res;
    res.boundary = score(hi) > 0.0 ? BoundaryTag::plus_infinity : BoundaryTag::minus_infinity;
    res.psi = score(hi) > 0.0 ? kInf : (positive_axis ? 0.0 : -kInf);
    return res;
  }
  const RootResult root = newton_bracketed(score, dscore, lo, hi, 1e-12, 1e-14, 300);
  if (!root.converged) {
    throw convergence_error("conditional MLE search did not converge");
  }
  return CmlResult{root.x, BoundaryTag::interior};
}

// 1-D maximize of f over the (possibly transformed) psi axis.
double maximize_over_psi(const std::function<double(double)>& f,
                         const Interval& psi_dom, double psi0) {
  const Transform1D tf = Transform1D::for_interval(psi_dom);
  auto g = [&](double v) { return f(tf.x_of(v)); };
  const Interval u_dom = tf.u_domain(psi_dom);
  const double v0 = tf.u_of(psi0).value_or(0.0);
  const MaxResult res = maximize_scalar(g, v0, u_dom.lo, u_dom.hi, 1e-13, 300);
  if (!res.converged) {
    throw convergence_error("psi maximization did not converge (|grad| = " +
                            std::to_string(res.grad_norm) + ")");
  }
  return tf.x_of(res.x);
}

struct TwoDResult {
  double u = 0.0, v = 0.0;
  double value = -kInf;
  bool converged = false;
};

// Coordinate ascent plus a finite-difference Newton polish in transformed
// coordinates. Deterministic for fixed inputs.
TwoDResult maximize_2d_from(const std::function<double(double, double)>& F,
                            double u0, double v0, const Interval& u_dom,
                            const Interval& v_dom) {
  double u = u0, v = v0;
  for (int sweep = 0; sweep < 8; ++sweep) {
    const MaxResult mu = maximize_scalar([&](double uu) { return F(uu, v); }, u,
                                         u_dom.lo, u_dom.hi, 1e-12, 120);
    const MaxResult mv = maximize_scalar([&](double vv) { return F(mu.x, vv); }, v,
                                         v_dom.lo, v_dom.hi, 1e-12, 120);
    const double du = std::fabs(mu.x - u), dv = std::fabs(mv.x - v);
    u = mu.x;
    v = mv.x;
    if (du < 1e-11 * (1.0 + std::fabs(u)) && dv < 1e-11 * (1.0 + std::fabs(v))) break;
  }
  // Newton polish.
  double fuv = F(u, v);
  for (int it = 0; it < 60; ++it) {
    const auto grad = fd_gradient(F, u, v);
    const Mat2 hess = fd_hessian(F, u, v);
    const double det = hess.det();
    if (!(det > 0.0) || !(hess.a11 < 0.0)) break;  // not concave here; rely on sweeps
    double su = -(hess.a22 * grad[0] - hess.a12 * grad[1]) / det;
    double sv = -(hess.a11 * grad[1] - hess.a12 * grad[0]) / det;
    double step = 1.0;
    bool moved = false;
    for (int half = 0; half < 30; ++half) {
      const double un = u + step * su, vn = v + step * sv;
      if (un > u_dom.lo && un < u_dom.hi && vn > v_dom.lo && vn < v_dom.hi) {
        const double fn = F(un, vn);
        if (fn >= fuv) {
          u = un;
          v = vn;
          fuv = fn;
          moved = true;
          break;
        }
      }
      step *= 0.5;
    }
    const double gn = std::max(std::fabs(grad[0]), std::fabs(grad[1]));
    if (gn <= 1e-10 || !moved) break;
  }
  TwoDResult res;
  res.u = u;
  res.v = v;
  res.value = fuv;
  res.converged = true;
  return res;
}

MleResult two_binomial_mle(const Dataset& data) {
  const auto c = TwoBinomialFamily::counts_of(data);
  MleResult res;
  res.theta.lambda = static_cast<double>(c.t());
  if (c.x == 0 || c.x == c.n || c.y == 0 || c.y == c.m) {
    const double ph = (c.x + 0.0) / c.n, qh = (c.y + 0.0) / c.m;
    const bool up = (ph >= qh);
    res.psi_boundary = up ? BoundaryTag::plus_infinity : BoundaryTag::minus_infinity;
    res.theta.psi = up ? kInf : -kInf;
    return res;
  }
  const double p = static_cast<double>(c.x) / c.n;
  const double q = static_cast<double>(c.y) / c.m;
  res.theta.psi = std::log(p / (1.0 - p)) - std::log(q / (1.0 - q));
  return res;
}

}  // namespace

std::string estimand_tag_name(EstimandTag tag) {
  switch (tag) {
    case EstimandTag::canonical: return "canonical";
    case EstimandTag::raw: return "raw";
    case EstimandTag::custom: return "custom";
  }
  return "custom";
}

MleResult mle(const Family& family, const Dataset& data) {
  family.validate_data(data);
  if (auto cf = closed_form(family, data, "mle")) {
    return MleResult{ParamPoint{(*cf)[0], (*cf)[1]}};
  }
  if (family.id() == "two-binomial") return two_binomial_mle(data);

  // Orthogonal families: lambda profile is psi-free, then maximize over psi.
  const double lam = family.profile_lambda(data, family.rough_start(data).psi);
  const auto loglik = family.bind_log_joint(data);
  const double psi =
      maximize_over_psi([&](double p) { return loglik(lam, p); },
                        family.domain().psi, family.rough_start(data).psi);
  return MleResult{ParamPoint{lam, psi}};
}

CmlResult conditional_mle(const Family& family, const Dataset& data) {
  family.validate_data(data);
  if (!family.flags().factorizable) {
    throw capability_error(family.id() +
                           ": no conditional factorization, conditional MLE undefined");
  }
  const auto ces = family.conditional_exp_structure(data);
  if (!ces) {
    throw capability_error(family.id() + ": conditional structure unavailable");
  }
  double psi0 = family.rough_start(data).psi;
  if (!std::isfinite(psi0)) psi0 = 1.0;
  return solve_conditional(*ces, family.domain().psi, psi0);
}

ParamPoint posterior_mode(const Family& family, const Dataset& data,
                          const Prior& prior, EstimatorDiagnostics* diag) {
  family.validate_data(data);
  if (prior.kind() == PriorKind::UniformFlat) {
    // The mode under a uniform prior is the MLE.
    return mle(family, data).theta;
  }
  if (family.id() == "uniform") {
    // Posterior density increases toward the support constraint for every
    // psi-power prior in use; the mode is the closed-form corner point.
    return UniformFamily::accessors(data).mle;
  }

  const auto loglik = family.bind_log_joint(data);
  const Prior* pr = &prior;
  const Transform1D ltf = family.lambda_transform(data);
  const Transform1D ptf = family.psi_transform();
  const Interval u_dom = ltf.u_domain(family.lambda_domain(data));
  const Interval v_dom = ptf.u_domain(family.domain().psi);
  auto F = [&](double u, double v) {
    const double lam = ltf.x_of(u);
    const double psi = ptf.x_of(v);
    return loglik(lam, psi) + pr->log_at(ParamPoint{lam, psi});
  };

  const ParamPoint start = family.rough_start(data);
  const double u0 = ltf.u_of(start.lambda).value_or(0.0);
  const double v0 = ptf.u_of(start.psi).value_or(0.0);
  const double offs[5][2] = {{0, 0}, {0.7, 0}, {-0.7, 0}, {0, 0.7}, {0, -0.7}};
  TwoDResult best;
  double worst_value = kInf;
  for (const auto& o : offs) {
    const TwoDResult r = maximize_2d_from(F, u0 + o[0], v0 + o[1], u_dom, v_dom);
    if (r.value > best.value) best = r;
    worst_value = std::min(worst_value, r.value);
  }
  ParamPoint mode{ltf.x_of(best.u), ptf.x_of(best.v)};

  if (diag != nullptr) {
    diag->mode_objective_spread = best.value - worst_value;
    diag->multimodal = diag->mode_objective_spread > 1e-6;
  }

  if (prior.kind() == PriorKind::PML && family.flags().factorizable) {
    // The mode under the profile-marginal prior must coincide with the
    // conditional-MLE pair; a mismatch is reported, never hidden.
    const CmlResult cml = conditional_mle(family, data);
    if (cml.boundary == BoundaryTag::interior) {
      const double lam_ref = family.profile_lambda(data, cml.psi);
      const double dl = std::fabs(mode.lambda - lam_ref) / (1.0 + std::fabs(lam_ref));
      const double dp = std::fabs(mode.psi - cml.psi) / (1.0 + std::fabs(cml.psi));
      if (diag != nullptr && (dl > 1e-8 || dp > 1e-8)) {
        diag->cml_consistency_violation = true;
      }
    }
  }
  return mode;
}

std::vector<std::function<double(double, double)>> estimand_functions(
    const Family& family, const Dataset& data, EstimandTag tag) {
  if (tag == EstimandTag::raw) {
    return {[](double lam, double) { return lam; },
            [](double, double psi) { return psi; }};
  }
  if (tag == EstimandTag::canonical) {
    if (!family.flags().exponential_family) {
      throw capability_error(family.id() +
                             ": canonical estimand undefined outside the exponential family");
    }
    const Family* fam = &family;
    auto data_copy = std::make_shared<Dataset>(data);
    return {[fam, data_copy](double lam, double psi) {
              return fam->canonical_at(*data_copy, ParamPoint{lam, psi}).first;
            },
            [](double, double psi) { return psi; }};
  }
  throw config_error("custom estimand requires explicit coordinate functions");
}

PosteriorMeanResult posterior_mean(
    const Family& family, const Dataset& data, const Prior& prior,
    EstimandTag tag, const QuadratureConfig& cfg,
    const std::vector<std::function<double(double, double)>>& custom) {
  if (family.id() == "uniform") {
    throw capability_error(
        "uniform: posterior means go through the closed-form catalog, not quadrature");
  }
  PosteriorMeanResult out;
  out.tag = tag;
  const auto g = (tag == EstimandTag::custom) ? custom
                                              : estimand_functions(family, data, tag);
  if (g.empty()) throw config_error("posterior mean needs at least one estimand");

  EstimatorDiagnostics mode_diag;
  const ParamPoint hint = posterior_mode(family, data, prior, &mode_diag);
  const PosteriorExpectation pe =
      posterior_expectation(family, data, prior, g, cfg, hint);
  out.values = pe.values;
  out.log_normalizer = pe.log_normalizer;
  out.diagnostics.precision_failure = !pe.precision_ok;
  out.diagnostics.quadrature_rel_error = pe.rel_error;
  out.diagnostics.evaluations = pe.evaluations;
  out.diagnostics.multimodal = mode_diag.multimodal;
  return out;
}

std::optional<std::vector<double>> closed_form(const Family& family,
                                               const Dataset& data,
                                               const std::string& kind) {
  const std::string id = family.id();
  const double n = static_cast<double>(data.n());
  if (id == "normal") {
    const double xbar = mean(data.x);
    const double ss = centered_sumsq(data.x);
    if (ss <= 0.0) return std::nullopt;
    if (kind == "mle") return std::vector<double>{xbar, n / ss};
    if (kind == "cml_psi") return std::vector<double>{(n - 1.0) / ss};
    if (kind == "post_mode_pml") return std::vector<double>{xbar, (n - 1.0) / ss};
    if (kind == "post_mean_canonical_mpml") {
      const double s2 = ss / (n - 1.0);
      return std::vector<double>{xbar / s2, 1.0 / s2};
    }
    if (kind == "post_mean_raw_mpml") {
      return std::vector<double>{xbar, (n - 1.0) / ss};
    }
    return std::nullopt;
  }
  if (id == "invgauss") {
    const double xbar = mean(data.x);
    double acc = 0.0;
    for (double xi : data.x) acc += 1.0 / xi;
    const double d = acc - n / xbar;
    if (d <= 0.0) return std::nullopt;
    if (kind == "mle") return std::vector<double>{xbar, n / d};
    if (kind == "cml_psi") return std::vector<double>{(n - 1.0) / d};
    if (kind == "post_mode_pml") return std::vector<double>{xbar, (n - 1.0) / d};
    return std::nullopt;
  }
  if (id == "laplace") {
    if (kind == "mle") {
      const double med = median(data.x);
      double acc = 0.0;
      for (double xi : data.x) acc += std::fabs(xi - med);
      if (acc <= 0.0) return std::nullopt;
      return std::vector<double>{med, n / acc};
    }
    return std::nullopt;
  }
  if (id == "ls-normal") {
    if (kind == "mle") {
      const double xbar = mean(data.x);
      const double ss = centered_sumsq(data.x);
      if (ss <= 0.0) return std::nullopt;
      return std::vector<double>{xbar, std::sqrt(n / ss)};
    }
    return std::nullopt;
  }
  if (id == "uniform") {
    const auto acc = UniformFamily::accessors(data);
    if (kind == "mle") return std::vector<double>{acc.mle.lambda, acc.mle.psi};
    if (kind == "post_mean_psi_mpml")
      return std::vector<double>{UniformFamily::post_mean_psi(data)};
    if (kind == "post_mean_lambda_mpml")
      return std::vector<double>{UniformFamily::post_mean_lambda(data)};
    if (kind == "post_mean_raw_mpml") {
      return std::vector<double>{UniformFamily::post_mean_lambda(data),
                                 UniformFamily::post_mean_psi(data)};
    }
    return std::nullopt;
  }
  return std::nullopt;
}

EstimateReport estimate_report(const Family& family, const Dataset& data,
                               EstimandTag tag, const QuadratureConfig& cfg) {
  EstimateReport rep;
  rep.mle = mle(family, data);
  if (family.flags().factorizable) {
    rep.cml = conditional_mle(family, data);
  }
  const FamilyPtr fam = make_family(family.id());
  const Prior pml_prior = Prior::pml(fam, data);
  rep.post_mode = posterior_mode(family, data, pml_prior, &rep.mode_diagnostics);
  if (family.id() == "uniform") {
    rep.post_mean.tag = EstimandTag::raw;
    rep.post_mean.values = *closed_form(family, data, "post_mean_raw_mpml");
  } else {
    const Prior mpml_prior = Prior::mpml(fam, data);
    rep.post_mean = posterior_mean(family, data, mpml_prior, tag, cfg);
  }
  return rep;
}

}  // namespace mpml
