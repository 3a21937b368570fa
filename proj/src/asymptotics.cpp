#include "mpml/asymptotics.hpp"

#include <cmath>

#include "mpml/families/edm.hpp"

namespace mpml {

ExpansionContext build_expansion_context(
    const Family& family, const Dataset& data, const Prior& prior,
    const ParamPoint& theta_hat,
    const std::vector<std::function<double(double, double)>>& estimands,
    bool force_finite_differences) {
  family.validate_data(data);
  family.require_in_domain(theta_hat);
  ExpansionContext ctx;
  ctx.theta_hat = theta_hat;
  ctx.n = data.n();
  const double n = static_cast<double>(data.n());

  const auto loglik = family.bind_log_joint(data);
  const Fn2 h_fn = [&](double lam, double psi) { return -loglik(lam, psi) / n; };

  const auto* edm = dynamic_cast<const EdmFamily*>(&family);
  if (edm != nullptr && !force_finite_differences) {
    ctx.h_grad = edm->h_gradient(data, theta_hat);
    ctx.h_hess = edm->h_hessian(data, theta_hat);
    ctx.h_third = edm->h_third(data, theta_hat);
  } else {
    ctx.h_grad = fd_gradient(h_fn, theta_hat.lambda, theta_hat.psi);
    ctx.h_hess = fd_hessian(h_fn, theta_hat.lambda, theta_hat.psi);
    ctx.h_third = fd_third(h_fn, theta_hat.lambda, theta_hat.psi);
  }
  if (!ctx.h_hess.positive_definite()) {
    throw std::domain_error("expansion context: Hessian of h not positive definite");
  }
  ctx.h_hess_inv = ctx.h_hess.inverse();

  const Fn2 prior_fn = [&](double lam, double psi) {
    return prior.log_at(ParamPoint{lam, psi});
  };
  ctx.prior_grad = fd_gradient(prior_fn, theta_hat.lambda, theta_hat.psi);

  for (const auto& g : estimands) {
    ctx.g_grad.push_back(fd_gradient(g, theta_hat.lambda, theta_hat.psi));
    ctx.g_hess.push_back(fd_hessian(g, theta_hat.lambda, theta_hat.psi));
  }

  const ParamPoint ml = mle(family, data).theta;
  const double dl = theta_hat.lambda - ml.lambda;
  const double dp = theta_hat.psi - ml.psi;
  ctx.scaled_mle_distance = n * std::sqrt(dl * dl + dp * dp);
  return ctx;
}

std::vector<double> laplace_correction(const ExpansionContext& ctx) {
  const double n = static_cast<double>(ctx.n);
  auto hinv = [&](int i, int j) {
    if (i == 0 && j == 0) return ctx.h_hess_inv.a11;
    if (i == 1 && j == 1) return ctx.h_hess_inv.a22;
    return ctx.h_hess_inv.a12;
  };
  // Bracket term per j: d/dtheta_j log pi - n h_j - (1/2) sum_rs h^rs h_rsj.
  double bracket[2];
  for (int j = 0; j < 2; ++j) {
    double third = 0.0;
    for (int r = 0; r < 2; ++r) {
      for (int s = 0; s < 2; ++s) third += hinv(r, s) * ctx.h_third(r, s, j);
    }
    bracket[j] = ctx.prior_grad[j] - n * ctx.h_grad[j] - 0.5 * third;
  }
  std::vector<double> out;
  out.reserve(ctx.g_grad.size());
  for (std::size_t k = 0; k < ctx.g_grad.size(); ++k) {
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) acc += ctx.g_grad[k][i] * hinv(i, j) * bracket[j];
    }
    const Mat2& gh = ctx.g_hess[k];
    const double trace_term = ctx.h_hess_inv.a11 * gh.a11 +
                              2.0 * ctx.h_hess_inv.a12 * gh.a12 +
                              ctx.h_hess_inv.a22 * gh.a22;
    out.push_back((acc + 0.5 * trace_term) / n);
  }
  return out;
}

std::vector<double> matched_prior_residual(const Family& family, const Dataset& data,
                                           const Prior& pi_r, const Prior& pi_n,
                                           EstimandTag tag,
                                           const QuadratureConfig& cfg) {
  const auto g = estimand_functions(family, data, tag);
  const ParamPoint theta_r = posterior_mode(family, data, pi_r, nullptr);
  const ParamPoint theta_ml = mle(family, data).theta;
  const Prior pi_a = Prior::product(pi_r, pi_n);

  const PosteriorExpectation ea =
      posterior_expectation(family, data, pi_a, g, cfg, theta_r);
  const PosteriorExpectation en =
      posterior_expectation(family, data, pi_n, g, cfg, theta_ml);

  std::vector<double> out(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double ga_hat = g[k](theta_r.lambda, theta_r.psi);
    const double gn_hat = g[k](theta_ml.lambda, theta_ml.psi);
    out[k] = (ea.values[k] - ga_hat) - (en.values[k] - gn_hat);
  }
  return out;
}

OrderFit order_fit(const std::vector<std::size_t>& ns, const std::vector<double>& diffs) {
  if (ns.size() != diffs.size()) {
    throw config_error("order_fit: ns and diffs must have matching lengths");
  }
  OrderFit fit;
  std::vector<double> lx, ly;
  int dropped = 0;
  for (std::size_t j = 0; j < ns.size(); ++j) {
    fit.max_diff = std::max(fit.max_diff, diffs[j]);
    if (diffs[j] > 0.0) {
      lx.push_back(std::log(static_cast<double>(ns[j])));
      ly.push_back(std::log(diffs[j]));
    } else {
      ++dropped;
    }
  }
  if (dropped > 0) {
    fit.note = std::to_string(dropped) + " zero difference(s) dropped";
  }
  const int m = static_cast<int>(lx.size());
  if (m < 4) {
    throw config_error("order_fit: fewer than 4 usable points for the log-log fit");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < m; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double det = m * sxx - sx * sx;
  fit.slope = (m * sxy - sx * sy) / det;
  const double intercept = (sy - fit.slope * sx) / m;
  double rss = 0.0;
  for (int i = 0; i < m; ++i) {
    const double resid = ly[i] - (intercept + fit.slope * lx[i]);
    rss += resid * resid;
  }
  fit.slope_se = (m > 2) ? std::sqrt(rss / (m - 2) * m / det) : 0.0;
  fit.points_used = m;
  return fit;
}

OrderProtocolResult run_order_protocol(const OrderProtocolConfig& cfg) {
  if (cfg.replications < 1) throw config_error("order protocol needs replications >= 1");
  const FamilyPtr family = make_family(cfg.family_id);
  family->require_in_domain(cfg.truth);

  OrderProtocolResult res;
  res.ns = cfg.ns;
  res.coordinates = {"xi", "psi"};
  res.mean_abs_diff.assign(2, std::vector<double>(cfg.ns.size(), 0.0));

  for (std::size_t j = 0; j < cfg.ns.size(); ++j) {
    const std::size_t n = cfg.ns[j];
    double acc[2] = {0.0, 0.0};
    int used = 0;
    for (int rep = 0; rep < cfg.replications; ++rep) {
      CounterRng rng(cfg.seed, (static_cast<std::uint64_t>(j) << 32) | rep);
      const Dataset data = family->sample(rng, cfg.truth, DataShape{n, std::nullopt});
      try {
        if (cfg.protocol == "mean-vs-cml") {
          const Prior prior = Prior::mpml(family, data);
          const PosteriorMeanResult pm =
              posterior_mean(*family, data, prior, EstimandTag::canonical, cfg.quad);
          const CmlResult cml = conditional_mle(*family, data);
          if (cml.boundary != BoundaryTag::interior) continue;
          const double lam_hat = family->profile_lambda(data, cml.psi);
          const auto ref =
              family->canonical_at(data, ParamPoint{lam_hat, cml.psi});
          acc[0] += std::fabs(pm.values[0] - ref.first);
          acc[1] += std::fabs(pm.values[1] - ref.second);
        } else if (cfg.protocol == "residual") {
          const Prior pi_r = Prior::pml(family, data);
          const Prior pi_n = Prior::jeffreys(family);
          const auto r = matched_prior_residual(*family, data, pi_r, pi_n,
                                                EstimandTag::canonical, cfg.quad);
          acc[0] += std::fabs(r[0]);
          acc[1] += std::fabs(r[1]);
        } else {
          throw config_error("unknown order protocol '" + cfg.protocol +
                             "' (use mean-vs-cml or residual)");
        }
        ++used;
      } catch (const convergence_error&) {
        // Rare optimizer failures are excluded and reflected in the count.
        continue;
      }
    }
    if (used == 0) throw convergence_error("order protocol: all replicates failed");
    res.mean_abs_diff[0][j] = acc[0] / used;
    res.mean_abs_diff[1][j] = acc[1] / used;
  }
  for (int c = 0; c < 2; ++c) {
    try {
      res.fits.push_back(order_fit(res.ns, res.mean_abs_diff[c]));
    } catch (const config_error& e) {
      // All-zero difference columns leave nothing to fit; report that rather
      // than fail the whole protocol.
      OrderFit f;
      f.slope = kNaN;
      f.note = e.what();
      for (double d : res.mean_abs_diff[c]) f.max_diff = std::max(f.max_diff, d);
      res.fits.push_back(f);
    }
  }
  return res;
}

}  // namespace mpml
