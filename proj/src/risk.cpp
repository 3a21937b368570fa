#include "mpml/risk.hpp"

#include <algorithm>
#include <cmath>

#include "mpml/families/strata.hpp"
#include "mpml/families/uniform.hpp"
#include "mpml/priors.hpp"

namespace mpml {

namespace {

double kl_per_obs_quadrature(const Family& family, const ParamPoint& a,
                             const ParamPoint& b) {
  const Interval sup = family.observation_support();
  auto log_pa = [&](double x) { return family.log_pdf_obs(x, a); };
  auto ratio = [&](double x) {
    return family.log_pdf_obs(x, a) - family.log_pdf_obs(x, b);
  };
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-9;
  const QuadMultiResult r = integrate_1d_multi(log_pa, {ratio}, sup, cfg,
                                               a.lambda, std::nullopt, "kl integrand");
  return r.numerators[0].value_over_exp(r.log_denominator);
}

struct EstimateOutcome {
  ParamPoint theta;
  bool finite = true;
  bool boundary = false;
};

class EstimatorRunner {
 public:
  EstimatorRunner(FamilyPtr family, const RiskConfig& cfg)
      : family_(std::move(family)), cfg_(cfg) {}

  EstimateOutcome run(const std::string& name, const Dataset& data) const {
    EstimateOutcome out;
    if (name == "mle") {
      const MleResult r = mle(*family_, data);
      out.theta = r.theta;
      out.boundary = r.psi_boundary != BoundaryTag::interior;
      out.finite = !out.boundary;
      return out;
    }
    if (name == "cml") {
      const CmlResult r = conditional_mle(*family_, data);
      out.boundary = r.boundary != BoundaryTag::interior;
      out.finite = !out.boundary;
      if (out.finite) {
        out.theta = ParamPoint{family_->profile_lambda(data, r.psi), r.psi};
      }
      return out;
    }
    if (name == "post_mode_pml") {
      const Prior prior = Prior::pml(family_, data);
      out.theta = posterior_mode(*family_, data, prior, nullptr);
      return out;
    }
    if (name == "post_mean_mpml") {
      if (auto cf = closed_form(*family_, data, "post_mean_raw_mpml")) {
        out.theta = ParamPoint{(*cf)[0], (*cf)[1]};
        return out;
      }
      const Prior prior = Prior::mpml(family_, data);
      const PosteriorMeanResult pm =
          posterior_mean(*family_, data, prior, EstimandTag::canonical, cfg_.quad);
      out.theta = family_->from_canonical_at(data, pm.values[0], pm.values[1]);
      return out;
    }
    if (name == "post_mean_jeffreys") {
      const Prior prior = Prior::jeffreys(family_);
      const PosteriorMeanResult pm =
          posterior_mean(*family_, data, prior, EstimandTag::canonical, cfg_.quad);
      out.theta = family_->from_canonical_at(data, pm.values[0], pm.values[1]);
      return out;
    }
    throw config_error("unknown estimator '" + name +
                       "' (known: mle cml post_mode_pml post_mean_mpml post_mean_jeffreys)");
  }

 private:
  FamilyPtr family_;
  const RiskConfig& cfg_;
};

}  // namespace

double kl_divergence(const Family& family, const ParamPoint& a, const ParamPoint& b,
                     std::size_t n) {
  family.require_in_domain(a);
  family.require_in_domain(b);
  if (a.lambda == b.lambda && a.psi == b.psi) return 0.0;
  double per_obs;
  try {
    per_obs = family.kl_per_obs(a, b);
  } catch (const capability_error&) {
    per_obs = kl_per_obs_quadrature(family, a, b);
  }
  return static_cast<double>(n) * per_obs;
}

PredictiveKlCurve conditional_predictive_kl_curve(const Family& family,
                                                  const Dataset& data,
                                                  const std::vector<double>& psi_grid,
                                                  const QuadratureConfig& cfg) {
  if (psi_grid.empty()) throw config_error("predictive KL curve needs a psi grid");
  if (!family.flags().factorizable || !family.flags().exponential_family) {
    throw capability_error(family.id() + ": predictive KL curve needs the conditional "
                                         "exponential structure");
  }
  const auto ces = family.conditional_exp_structure(data);
  if (!ces) throw capability_error(family.id() + ": conditional structure unavailable");

  const FamilyPtr fam = make_family(family.id());
  const Prior prior = Prior::mpml(fam, data);
  auto B = ces->B;
  const std::vector<std::function<double(double, double)>> g = {
      [](double, double psi) { return psi; },
      [B](double, double psi) { return B(psi); }};
  EstimatorDiagnostics diag;
  const ParamPoint hint = posterior_mode(family, data, prior, &diag);
  const PosteriorExpectation pe = posterior_expectation(family, data, prior, g, cfg, hint);
  const double psi_bar = pe.values[0];
  const double mean_B = pe.values[1];

  PredictiveKlCurve curve;
  curve.psi_grid = psi_grid;
  curve.psi_post_mean = psi_bar;
  const CmlResult cml = conditional_mle(family, data);
  curve.psi_cml = cml.psi;
  curve.values.reserve(psi_grid.size());
  for (double p : psi_grid) {
    curve.values.push_back((p - psi_bar) * ces->Bp(p) - ces->B(p) + mean_B);
  }
  curve.min_index = static_cast<std::size_t>(
      std::min_element(curve.values.begin(), curve.values.end()) -
      curve.values.begin());
  curve.min_on_boundary = psi_grid.size() > 1 && (curve.min_index == 0 ||
                          curve.min_index + 1 == psi_grid.size());
  return curve;
}

double saddlepoint_residual(const Family& family, const Dataset& data,
                            const ParamPoint& predictor_theta, const Prior& prior,
                            const QuadratureConfig& cfg) {
  family.require_in_domain(predictor_theta);
  const auto loglik = family.bind_log_joint(data);
  const double loglik_hat = loglik(predictor_theta.lambda, predictor_theta.psi);
  DataShape shape;
  shape.n = data.n();
  shape.z = data.z;
  const Family* fam = &family;
  const ParamPoint pred = predictor_theta;
  const std::vector<std::function<double(double, double)>> g = {
      [fam, pred, shape, loglik, loglik_hat](double lam, double psi) {
        const ParamPoint th{lam, psi};
        return fam->kl_replicate(pred, th, shape) - (loglik_hat - loglik(lam, psi));
      }};
  const PosteriorExpectation pe =
      posterior_expectation(family, data, prior, g, cfg, predictor_theta);
  return pe.values[0];
}

void RiskConfig::validate() const {
  if (replications < 100) {
    throw config_error("risk simulation needs at least 100 replications");
  }
  if (estimators.empty()) throw config_error("risk simulation needs estimators");
  if (loss != "kl-plugin" && loss != "squared-error") {
    throw config_error("unknown loss '" + loss + "' (use kl-plugin or squared-error)");
  }
  if (strata_count) {
    if (strata_size < 2) throw config_error("strata need n_k >= 2");
    if (loss == "kl-plugin") {
      throw config_error("strata risk uses the squared-error loss on psi");
    }
  } else if (n < 2) {
    throw config_error("risk simulation needs n >= 2");
  }
}

RiskReport simulate_risk(const RiskConfig& config) {
  config.validate();
  const FamilyPtr family = make_family(config.family_id);
  family->require_in_domain(config.truth);

  RiskReport report;
  report.config = config;
  report.loss_convention =
      config.loss == "kl-plugin"
          ? "KL per size-n replicate (n x per-observation KL for iid sampling)"
          : "squared error per coordinate, summed";

  const std::size_t ne = config.estimators.size();
  const int reps = config.replications;
  // losses[e][r]: NaN marks exclusion (boundary or failure).
  std::vector<std::vector<double>> losses(ne, std::vector<double>(reps, kNaN));
  std::vector<std::vector<double>> lam_hat(ne, std::vector<double>(reps, kNaN));
  std::vector<std::vector<double>> psi_hat(ne, std::vector<double>(reps, kNaN));
  std::vector<int> boundary(ne, 0), failures(ne, 0);

  DataShape shape;
  shape.n = config.n;
  shape.z = config.covariate_pattern;

  const bool strata_mode = config.strata_count.has_value();
  std::optional<StrataSpec> strata;
  std::vector<double> strata_lambdas;
  if (strata_mode) {
    StrataSpec sp;
    sp.inner = family;
    sp.sizes.assign(*config.strata_count, config.strata_size);
    strata = sp;
    strata_lambdas.assign(*config.strata_count, config.truth.lambda);
  }

  EstimatorRunner runner(family, config);

  for (int r = 0; r < reps; ++r) {
    CounterRng rng(config.seed, static_cast<std::uint64_t>(r));
    Dataset data;
    if (strata_mode) {
      data = sample_strata(rng, *strata, strata_lambdas, config.truth.psi);
    } else {
      data = family->sample(rng, config.truth, shape);
    }
    for (std::size_t e = 0; e < ne; ++e) {
      try {
        if (strata_mode) {
          const std::string& name = config.estimators[e];
          double psi;
          if (name == "mle") {
            psi = strata_psi_mle(*strata, data);
          } else if (name == "cml") {
            psi = strata_psi_cml(*strata, data);
          } else {
            throw config_error("strata mode supports the mle and cml estimators");
          }
          psi_hat[e][r] = psi;
          const double d = psi - config.truth.psi;
          losses[e][r] = d * d;
          continue;
        }
        const EstimateOutcome out = runner.run(config.estimators[e], data);
        if (out.boundary) {
          ++boundary[e];
          continue;
        }
        if (!out.finite) {
          ++failures[e];
          continue;
        }
        lam_hat[e][r] = out.theta.lambda;
        psi_hat[e][r] = out.theta.psi;
        if (config.loss == "kl-plugin") {
          losses[e][r] = kl_divergence(*family, out.theta, config.truth, config.n);
        } else {
          const double dl = out.theta.lambda - config.truth.lambda;
          const double dp = out.theta.psi - config.truth.psi;
          losses[e][r] = dl * dl + dp * dp;
        }
      } catch (const config_error&) {
        throw;
      } catch (const std::exception&) {
        ++failures[e];
      }
    }
  }

  for (std::size_t e = 0; e < ne; ++e) {
    EstimatorSummary s;
    s.name = config.estimators[e];
    s.boundary_events = boundary[e];
    s.failures = failures[e];
    double acc = 0.0, acc2 = 0.0;
    double al = 0.0, ap = 0.0, ap2 = 0.0;
    int m = 0;
    for (int r = 0; r < reps; ++r) {
      if (std::isnan(losses[e][r])) continue;
      acc += losses[e][r];
      acc2 += losses[e][r] * losses[e][r];
      if (!std::isnan(lam_hat[e][r])) al += lam_hat[e][r];
      ap += psi_hat[e][r];
      ap2 += psi_hat[e][r] * psi_hat[e][r];
      ++m;
    }
    s.used = m;
    if (m > 1) {
      s.mean_loss = acc / m;
      s.loss_se = std::sqrt(std::max(0.0, acc2 / m - s.mean_loss * s.mean_loss) / (m - 1));
      s.mean_lambda = al / m;
      s.mean_psi = ap / m;
      s.bias_lambda = s.mean_lambda - config.truth.lambda;
      s.bias_psi = s.mean_psi - config.truth.psi;
      s.bias_psi_se =
          std::sqrt(std::max(0.0, ap2 / m - s.mean_psi * s.mean_psi) / (m - 1));
    }
    report.estimators.push_back(s);
  }

  for (std::size_t i = 0; i < ne; ++i) {
    for (std::size_t j = i + 1; j < ne; ++j) {
      PairedDifference pd;
      pd.first = config.estimators[i];
      pd.second = config.estimators[j];
      double acc = 0.0, acc2 = 0.0;
      int m = 0;
      for (int r = 0; r < reps; ++r) {
        if (std::isnan(losses[i][r]) || std::isnan(losses[j][r])) continue;
        const double d = losses[i][r] - losses[j][r];
        acc += d;
        acc2 += d * d;
        ++m;
      }
      pd.pairs = m;
      if (m > 1) {
        pd.mean_diff = acc / m;
        pd.se = std::sqrt(std::max(0.0, acc2 / m - pd.mean_diff * pd.mean_diff) / (m - 1));
      }
      report.pairs.push_back(pd);
    }
  }
  return report;
}

}  // namespace mpml
