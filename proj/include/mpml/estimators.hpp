#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpml/family.hpp"
#include "mpml/priors.hpp"
#include "mpml/quadrature.hpp"

namespace mpml {

enum class EstimandTag { canonical, raw, custom };

std::string estimand_tag_name(EstimandTag tag);

struct EstimatorDiagnostics {
  bool precision_failure = false;
  bool multimodal = false;
  // Set when the posterior mode under the profile-marginal prior fails to
  // match the independently computed conditional-MLE pair within 1e-8.
  bool cml_consistency_violation = false;
  double quadrature_rel_error = 0.0;
  double mode_objective_spread = 0.0;
  int evaluations = 0;
};

// Boundary tag for estimators that can run off to infinity on extreme
// tables (two-binomial conditional MLE).
enum class BoundaryTag { interior = 0, plus_infinity = 1, minus_infinity = -1 };

struct MleResult {
  ParamPoint theta;
  BoundaryTag psi_boundary = BoundaryTag::interior;
};

struct CmlResult {
  double psi = 0.0;
  BoundaryTag boundary = BoundaryTag::interior;
};

struct PosteriorMeanResult {
  std::vector<double> values;  // one per estimand coordinate
  EstimandTag tag = EstimandTag::canonical;
  double log_normalizer = -kInf;
  EstimatorDiagnostics diagnostics;
};

// Joint maximizer of log_joint. Orthogonal families reduce to the profile
// point plus a one-dimensional psi maximization; closed forms are used where
// the catalog has them.
MleResult mle(const Family& family, const Dataset& data);

// Argmax over psi of the conditional likelihood pc(x | t, psi).
CmlResult conditional_mle(const Family& family, const Dataset& data);

// Argmax of log_joint + log prior over (lambda, psi), by deterministic
// multi-start coordinate ascent with a Newton polish. A flat prior routes to
// mle() (the uniform-prior mode is the MLE).
ParamPoint posterior_mode(const Family& family, const Dataset& data,
                          const Prior& prior,
                          EstimatorDiagnostics* diag = nullptr);

// Posterior mean of the requested estimand by nested adaptive quadrature.
PosteriorMeanResult posterior_mean(
    const Family& family, const Dataset& data, const Prior& prior,
    EstimandTag tag, const QuadratureConfig& cfg = QuadratureConfig{},
    const std::vector<std::function<double(double, double)>>& custom = {});

// Estimand coordinate functions for a tag.
std::vector<std::function<double(double, double)>> estimand_functions(
    const Family& family, const Dataset& data, EstimandTag tag);

// Exact expressions used as oracles in tests and fast paths in simulations.
// Kinds: "mle", "cml_psi", "post_mode_pml", "post_mean_canonical_mpml",
// "post_mean_raw_mpml". Absent entries return nullopt and callers fall back
// to the numeric path.
std::optional<std::vector<double>> closed_form(const Family& family,
                                               const Dataset& data,
                                               const std::string& kind);

struct EstimateReport {
  MleResult mle;
  std::optional<CmlResult> cml;  // absent for non-factorizable families
  ParamPoint post_mode;
  PosteriorMeanResult post_mean;
  EstimatorDiagnostics mode_diagnostics;
};

// The full four-estimator report: MLE, conditional MLE, posterior mode under
// the profile-marginal prior, posterior mean under the matching prior.
EstimateReport estimate_report(const Family& family, const Dataset& data,
                               EstimandTag tag,
                               const QuadratureConfig& cfg = QuadratureConfig{});

}  // namespace mpml
