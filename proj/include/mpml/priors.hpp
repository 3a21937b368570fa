#pragma once

#include <functional>
#include <optional>
#include <string>

#include "mpml/family.hpp"
#include "mpml/types.hpp"

namespace mpml {

enum class PriorKind {
  PML,             // reciprocal of the profile marginal likelihood of t
  Jeffreys,        // sqrt det Fisher information
  MPML,            // PML * Jeffreys
  AsymptoticMPML,  // sqrt(g1(lambda) I22) when I11 factors
  MarginalPML,     // reciprocal of the profile conditional likelihood
  MarginalMPML,    // MarginalPML * Jeffreys
  StrataMPML,      // product over strata
  UniformFlat,
  StoredReference,
  Custom,
};

std::string prior_kind_name(PriorKind kind);

// An evaluable unnormalized log-prior. Data-dependent kinds capture their
// context (family, dataset, ancillary value) at construction; evaluation is
// immutable and thread-safe afterwards. Impropriety is expected and never an
// error here; posterior propriety is checked downstream.
class Prior {
 public:
  PriorKind kind() const { return kind_; }
  const std::string& family_id() const { return family_id_; }
  std::size_t context_n() const { return n_; }
  std::optional<double> ancillary_value() const { return t_; }

  // Unnormalized log-prior at theta, in the (lambda, psi) parametrization.
  double log_at(const ParamPoint& theta) const;

  static Prior pml(FamilyPtr family, const Dataset& data);
  static Prior jeffreys(FamilyPtr family);
  static Prior mpml(FamilyPtr family, const Dataset& data);
  static Prior asymptotic_mpml(FamilyPtr family);
  static Prior marginal_pml(FamilyPtr family, const Dataset& data);
  static Prior marginal_mpml(FamilyPtr family, const Dataset& data);
  // Scalar surface of the strata product prior: evaluates on the diagonal
  // lambda_1 = ... = lambda_K = theta.lambda. The vector form lives in
  // strata_mpml_log.
  static Prior strata_mpml(FamilyPtr inner, const Dataset& data);
  static Prior flat();
  static Prior stored_reference(const std::string& family_id, std::size_t n);
  static Prior custom(std::function<double(const ParamPoint&)> log_fn,
                      std::string name = "custom");

  // Product prior pi_a * pi_b (log-sum), used for the two-prior protocols.
  static Prior product(const Prior& a, const Prior& b);

 private:
  PriorKind kind_ = PriorKind::UniformFlat;
  std::string family_id_;
  std::size_t n_ = 0;
  std::optional<double> t_;
  FamilyPtr family_;  // kept for domain checks when present
  std::function<double(const ParamPoint&)> eval_;
};

// Spec-level free function.
inline double prior_log(const Prior& prior, const ParamPoint& theta) {
  return prior.log_at(theta);
}

// Asymptotic construction when I11(lambda, psi) = g1(lambda) g2(psi): the
// prior sqrt(g1(lambda) I22(lambda, psi)) plus the intermediate marginal
// approximation 1/sqrt(I11(t, psi)). The declared factorization is verified
// on a domain grid at construction (relative residual <= 1e-8).
struct AsymptoticMpmlParts {
  double ampml_log = 0.0;
  double approx_pml_log = 0.0;
};
AsymptoticMpmlParts asymptotic_mpml_log(const Family& family,
                                        const ParamPoint& theta, double t);

// Both readings of the gamma reference-prior gap f(psi, n): the printed form
// (n - 1/2) psi log(n psi) and the Stirling-consistent form
// (n psi - 1/2) log(n psi). The latter tends to (1/2) log 2 pi.
struct GammaGap {
  double printed = 0.0;
  double stirling = 0.0;
};
GammaGap gamma_reference_gap(double psi, std::size_t n);

constexpr double kHalfLog2Pi = 0.9189385332046727418;

// Closed-form reference priors quoted for comparison (normal, inverse
// Gaussian, and the gamma relation reference = MPML * exp f(psi, n)).
double stored_reference_log(const std::string& family_id, const ParamPoint& theta,
                            std::size_t n);

// CLI vocabulary: "pml", "jeffreys", "mpml", "ampml", "marginal-pml",
// "marginal-mpml", "strata-mpml", "flat", "reference".
Prior make_prior(const std::string& kind, FamilyPtr family,
                 const std::optional<Dataset>& data);
std::vector<std::string> prior_registry_ids();

}  // namespace mpml
