#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mpml/estimators.hpp"
#include "mpml/family.hpp"
#include "mpml/priors.hpp"
#include "mpml/util/fd.hpp"

namespace mpml {

// Everything needed to evaluate the posterior-mean expansion about an
// estimator theta_hat: h(theta) = -log p(x|theta)/n with its first three
// derivative arrays, the prior log-gradient, and the estimand gradients and
// Hessians, all at theta_hat.
struct ExpansionContext {
  ParamPoint theta_hat;
  std::size_t n = 0;
  std::array<double, 2> h_grad{};
  Mat2 h_hess;
  Mat2 h_hess_inv;
  Tensor3Sym h_third;
  std::array<double, 2> prior_grad{};
  std::vector<std::array<double, 2>> g_grad;
  std::vector<Mat2> g_hess;
  // n * distance(theta_hat, theta_ML): the expansion assumes this stays
  // bounded along an n-sweep.
  double scaled_mle_distance = 0.0;
};

ExpansionContext build_expansion_context(
    const Family& family, const Dataset& data, const Prior& prior,
    const ParamPoint& theta_hat,
    const std::vector<std::function<double(double, double)>>& estimands,
    bool force_finite_differences = false);

// The bracketed first-order correction of the posterior-mean expansion, one
// value per estimand coordinate. The h_j term is retained; it vanishes when
// theta_hat is the MLE.
std::vector<double> laplace_correction(const ExpansionContext& ctx);

// Residual (E^A[g] - g(theta_r)) - (E^N[g] - g(theta_ML)) where
// pi_A = pi_r * pi_N and theta_r is the posterior mode under pi_r. With a
// flat pi_r both terms coincide and the residual is identically zero.
std::vector<double> matched_prior_residual(const Family& family, const Dataset& data,
                                           const Prior& pi_r, const Prior& pi_n,
                                           EstimandTag tag,
                                           const QuadratureConfig& cfg);

struct OrderFit {
  double slope = 0.0;
  double slope_se = 0.0;
  int points_used = 0;
  double max_diff = 0.0;
  std::string note;
};

// Least-squares slope of log(diff) on log(n); zero or negative diffs are
// dropped with a note. Fewer than 4 usable points is an error.
OrderFit order_fit(const std::vector<std::size_t>& ns, const std::vector<double>& diffs);

// Replicated order-check protocols over an n-sweep.
//   "mean-vs-cml": mean abs difference between the posterior mean of the
//     canonical estimand under the matching prior and the canonical image of
//     the conditional-MLE pair.
//   "residual": mean abs matched-prior residual with pi_r the profile
//     marginal prior and pi_N the Jeffreys prior.
struct OrderProtocolConfig {
  std::string protocol = "mean-vs-cml";
  std::string family_id = "normal";
  ParamPoint truth{0.5, 1.2};
  std::vector<std::size_t> ns{8, 16, 32, 64, 128};
  int replications = 200;
  std::uint64_t seed = 1;
  QuadratureConfig quad;
};

struct OrderProtocolResult {
  std::vector<std::size_t> ns;
  std::vector<std::string> coordinates;
  // mean_abs_diff[coord][j] over the replications at ns[j]
  std::vector<std::vector<double>> mean_abs_diff;
  std::vector<OrderFit> fits;
};

OrderProtocolResult run_order_protocol(const OrderProtocolConfig& cfg);

}  // namespace mpml
