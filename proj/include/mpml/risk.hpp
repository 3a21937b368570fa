#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpml/estimators.hpp"
#include "mpml/family.hpp"
#include "mpml/quadrature.hpp"

namespace mpml {

// KL divergence between size-n replicates of the two parameter points:
// n times the per-observation divergence for iid families, with a closed
// form where the family has one and a quadrature fallback otherwise.
double kl_divergence(const Family& family, const ParamPoint& a, const ParamPoint& b,
                     std::size_t n);

// Posterior-expected KL between conditional plug-in predictors on a psi
// grid: value(psi') = E_post[KL(pc(.|t,psi'), pc(.|t,psi))] under the
// matching prior. The minimizer sits at the posterior mean of psi.
struct PredictiveKlCurve {
  std::vector<double> psi_grid;
  std::vector<double> values;
  double psi_post_mean = 0.0;
  double psi_cml = 0.0;
  std::size_t min_index = 0;
  bool min_on_boundary = false;
};

PredictiveKlCurve conditional_predictive_kl_curve(const Family& family,
                                                  const Dataset& data,
                                                  const std::vector<double>& psi_grid,
                                                  const QuadratureConfig& cfg = {});

// E_post[ KL(p(.|theta_hat), p(.|theta)) - log{p(x|theta_hat)/p(x|theta)} ]
// under `prior`. Zero for the plug-in MLE (sample-wise identity) and for the
// posterior mean of the canonical parameter.
double saddlepoint_residual(const Family& family, const Dataset& data,
                            const ParamPoint& predictor_theta, const Prior& prior,
                            const QuadratureConfig& cfg = {});

// Seeded frequentist risk comparison with common random numbers.
struct RiskConfig {
  std::string family_id = "gamma";
  ParamPoint truth{1.0, 2.0};
  std::size_t n = 5;
  // Strata mode: inner family `family_id` with K strata of size n_k and a
  // common psi; lambda_k all equal to truth.lambda.
  std::optional<std::size_t> strata_count;
  std::size_t strata_size = 2;
  std::optional<std::vector<double>> covariate_pattern;  // two-binomial
  int replications = 1000;
  std::uint64_t seed = 1;
  std::vector<std::string> estimators{"mle", "cml"};
  std::string loss = "kl-plugin";  // or "squared-error"
  QuadratureConfig quad;

  void validate() const;
};

struct EstimatorSummary {
  std::string name;
  double mean_loss = 0.0;
  double loss_se = 0.0;
  // Mean estimate and bias per coordinate (lambda, psi), over replicates
  // where the estimator was finite.
  double mean_lambda = 0.0;
  double mean_psi = 0.0;
  double bias_lambda = 0.0;
  double bias_psi = 0.0;
  double bias_psi_se = 0.0;
  int boundary_events = 0;
  int failures = 0;
  int used = 0;
};

struct PairedDifference {
  std::string first;
  std::string second;
  double mean_diff = 0.0;  // loss(first) - loss(second) on common replicates
  double se = 0.0;
  int pairs = 0;
};

struct RiskReport {
  RiskConfig config;
  std::string loss_convention;
  std::vector<EstimatorSummary> estimators;
  std::vector<PairedDifference> pairs;
};

// Pure function of the config: bit-identical reports for identical configs.
RiskReport simulate_risk(const RiskConfig& config);

}  // namespace mpml
