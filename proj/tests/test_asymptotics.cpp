#include <doctest.h>

#include <cmath>

#include "mpml/asymptotics.hpp"
#include "mpml/util/rng.hpp"

using namespace mpml;

namespace {
const Dataset kRunningData{{1.2, 0.8, 2.0, 1.0}, std::nullopt, std::nullopt};
}

TEST_CASE("analytic and finite-difference derivative paths agree for the normal") {
  const FamilyPtr family = make_family("normal");
  const Prior prior = Prior::jeffreys(family);
  const ParamPoint at = mle(*family, kRunningData).theta;
  const auto g = estimand_functions(*family, kRunningData, EstimandTag::canonical);
  const ExpansionContext a =
      build_expansion_context(*family, kRunningData, prior, at, g, false);
  const ExpansionContext b =
      build_expansion_context(*family, kRunningData, prior, at, g, true);
  CHECK(std::fabs(a.h_grad[0] - b.h_grad[0]) <= 1e-7);
  CHECK(std::fabs(a.h_grad[1] - b.h_grad[1]) <= 1e-7);
  CHECK(std::fabs(a.h_hess.a11 - b.h_hess.a11) <= 1e-7 * (1 + std::fabs(a.h_hess.a11)));
  CHECK(std::fabs(a.h_hess.a22 - b.h_hess.a22) <= 1e-7 * (1 + std::fabs(a.h_hess.a22)));
  CHECK(std::fabs(a.h_third.t000 - b.h_third.t000) <= 1e-6);
  CHECK(std::fabs(a.h_third.t111 - b.h_third.t111) <=
        1e-6 * (1 + std::fabs(a.h_third.t111)));
}

TEST_CASE("lambda-coordinate correction vanishes at the normal MLE with a flat prior") {
  const FamilyPtr family = make_family("normal");
  const ParamPoint at = mle(*family, kRunningData).theta;
  const std::vector<std::function<double(double, double)>> g = {
      [](double lam, double) { return lam; }};
  const ExpansionContext ctx =
      build_expansion_context(*family, kRunningData, Prior::flat(), at, g);
  const std::vector<double> corr = laplace_correction(ctx);
  CHECK(std::fabs(corr[0]) <= 1e-10);
  CHECK(ctx.scaled_mle_distance <= 1e-6);
}

TEST_CASE("correction removes the leading error of the plug-in approximation") {
  // Gamma family, flat prior, raw estimand: E[g] - g(MLE) is first order in
  // 1/n; subtracting the correction must decay at least one power faster.
  const FamilyPtr family = make_family("gamma");
  const ParamPoint truth{1.2, 2.2};
  const std::vector<std::size_t> ns{10, 20, 40, 80};
  const int reps = 60;
  QuadratureConfig quad;
  quad.rel_tol = 1e-10;
  std::vector<double> plain(ns.size(), 0.0), corrected(ns.size(), 0.0);
  for (std::size_t j = 0; j < ns.size(); ++j) {
    int used = 0;
    for (int rep = 0; rep < reps; ++rep) {
      CounterRng rng(100 + rep, j);
      const Dataset data = family->sample(rng, truth, DataShape{ns[j], std::nullopt});
      const ParamPoint ml = mle(*family, data).theta;
      const auto g = estimand_functions(*family, data, EstimandTag::raw);
      const Prior flat = Prior::flat();
      const PosteriorExpectation pe =
          posterior_expectation(*family, data, flat, g, quad, ml);
      const ExpansionContext ctx =
          build_expansion_context(*family, data, flat, ml, g);
      const std::vector<double> corr = laplace_correction(ctx);
      // psi coordinate carries the visible bias.
      plain[j] += std::fabs(pe.values[1] - ml.psi);
      corrected[j] += std::fabs(pe.values[1] - ml.psi - corr[1]);
      ++used;
    }
    plain[j] /= used;
    corrected[j] /= used;
  }
  const OrderFit f_plain = order_fit(ns, plain);
  const OrderFit f_corr = order_fit(ns, corrected);
  CHECK(f_plain.slope == doctest::Approx(-1.0).epsilon(0.35));
  CHECK(f_corr.slope <= f_plain.slope - 0.7);
}

TEST_CASE("matched-prior residual with a flat first prior is exactly zero") {
  const FamilyPtr gamma = make_family("gamma");
  QuadratureConfig quad;
  for (int rep = 0; rep < 5; ++rep) {
    CounterRng rng(55 + rep, 0);
    const Dataset data = gamma->sample(rng, ParamPoint{1.0, 2.0}, DataShape{9, std::nullopt});
    const auto r = matched_prior_residual(*gamma, data, Prior::flat(),
                                          Prior::jeffreys(gamma),
                                          EstimandTag::canonical, quad);
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 0.0);
  }
}

TEST_CASE("order protocol runs end to end on a tiny configuration") {
  OrderProtocolConfig cfg;
  cfg.protocol = "mean-vs-cml";
  cfg.family_id = "gamma";
  cfg.truth = ParamPoint{1.0, 2.0};
  cfg.ns = {8, 12, 16, 24};
  cfg.replications = 10;
  cfg.seed = 3;
  const OrderProtocolResult res = run_order_protocol(cfg);
  REQUIRE(res.fits.size() == 2);
  for (const auto& col : res.mean_abs_diff) {
    for (double d : col) CHECK(d >= 0.0);
  }
  OrderProtocolConfig bad = cfg;
  bad.protocol = "nonsense";
  CHECK_THROWS_AS(run_order_protocol(bad), config_error);
}
