#pragma once

#include "mpml/family.hpp"

namespace mpml {

// Two independent binomial counts x ~ Bi(n, p), y ~ Bi(m, q) presented as
// 0/1 observations with a binary covariate (z = 1 rows form the first
// group). The inferential parametrization is lambda = n p + m q (the mean of
// t = x + y) and psi = log{p(1-q) / (q(1-p))}, the log odds ratio; the
// canonical coordinates are (alpha, psi) with logit q = alpha and
// logit p = alpha + psi. Joint densities are over the pair of counts.
class TwoBinomialFamily : public Family {
 public:
  struct Counts {
    int x = 0, n = 0, y = 0, m = 0;
    int t() const { return x + y; }
  };
  static Counts counts_of(const Dataset& data);
  static Dataset dataset_from_counts(int x, int n, int y, int m);

  std::string id() const override { return "two-binomial"; }
  FamilyFlags flags() const override;
  AncillaryKind ancillary_kind() const override { return AncillaryKind::sum; }
  ParamDomain domain() const override {
    return ParamDomain{Interval{0.0, kInf}, Interval{-kInf, kInf}};
  }

  void validate_data(const Dataset& data) const override;

  double log_joint(const Dataset& data, const ParamPoint& theta) const override;
  std::function<double(double, double)> bind_log_joint(const Dataset& data) const override;
  double log_marginal_ancillary(double t, const ParamPoint& theta,
                                std::size_t n) const override;
  double log_conditional(const Dataset& data, double t, double psi,
                         std::optional<double> lambda) const override;
  double profile_lambda(const Dataset& data, double psi) const override;
  Mat2 fisher_info(const ParamPoint& theta, double n) const override;
  std::pair<double, double> canonical_of(const ParamPoint& theta) const override;
  ParamPoint from_canonical(double xi, double psi) const override;
  std::pair<double, double> canonical_at(const Dataset& data,
                                         const ParamPoint& theta) const override;
  ParamPoint from_canonical_at(const Dataset& data, double xi,
                               double psi) const override;
  std::optional<CondExpStruct> conditional_exp_structure(const Dataset& data) const override;
  Transform1D lambda_transform(const Dataset& data) const override;
  Interval lambda_domain(const Dataset& data) const override;
  ParamPoint rough_start(const Dataset& data) const override;
  Dataset sample(CounterRng& rng, const ParamPoint& theta,
                 const DataShape& shape) const override;
  double kl_replicate(const ParamPoint& a, const ParamPoint& b,
                      const DataShape& shape) const override;
  double kl_per_obs(const ParamPoint& a, const ParamPoint& b) const override;
  Interval observation_support() const override { return Interval{-0.5, 1.5}; }

  // Group success probabilities at (lambda, psi); solves the mean equation
  // for alpha. Group sizes must be supplied because the family's parameter
  // region depends on them.
  struct Probs { double p = 0.0, q = 0.0, alpha = 0.0; };
  static Probs probs_at(const ParamPoint& theta, int n, int m);
  static Probs probs_at_alpha(double alpha, double psi);

  // Fisher information with explicit group sizes (total scaled to n + m).
  static Mat2 fisher_info_counts(const ParamPoint& theta, int n, int m);
};

// Conditional log-pmf of x given t = x + y under log-odds-ratio psi: the
// noncentral hypergeometric, computed by log-sum-exp over the support.
double binomial_conditional_loglik(int x, int n, int y, int m, double psi);

}  // namespace mpml
