#pragma once

#include "mpml/family.hpp"

namespace mpml {

// Multiple strata sharing the dispersion-type component psi, each with its
// own lambda_k: the classic incidental-parameter (Neyman-Scott) setting. The
// strata model is not a two-parameter Family; the risk harness and priors
// address it through this dedicated surface.
struct StrataSpec {
  FamilyPtr inner;
  std::vector<std::size_t> sizes;  // all >= 2

  std::size_t K() const { return sizes.size(); }
};

StrataSpec strata_spec_of(const FamilyPtr& inner, const Dataset& data);
std::vector<Dataset> split_strata(const Dataset& data);

// sum_k inner log_joint(x_k | lambda_k, psi).
double strata_log_joint(const StrataSpec& spec, const Dataset& data,
                        const std::vector<double>& lambdas, double psi);

// Joint MLE of psi (lambda_k profiled out per stratum) and the conditional
// MLE of psi from the product of per-stratum conditional likelihoods.
double strata_psi_mle(const StrataSpec& spec, const Dataset& data);
double strata_psi_cml(const StrataSpec& spec, const Dataset& data);

// Product prior: sum_k [pml_k(psi) + jeffreys_k(lambda_k, psi)].
double strata_mpml_log(const StrataSpec& spec, const Dataset& data,
                       const std::vector<double>& lambdas, double psi);

Dataset sample_strata(CounterRng& rng, const StrataSpec& spec,
                      const std::vector<double>& lambdas, double psi);

}  // namespace mpml
