#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpml/quadrature.hpp"
#include "mpml/types.hpp"
#include "mpml/util/rng.hpp"

namespace mpml {

// Capability flags of a sampling family. `factorizable` means the joint
// splits as pm(t|lambda,psi) * pc(x|t,psi); `marginal_mle_split` means the
// alternative split pc(x|t,lambda,psi) * pm(t|psi) is available.
struct FamilyFlags {
  bool factorizable = false;
  bool estimation_orthogonal = false;
  bool exponential_family = false;
  bool regular = false;
  bool has_ancillary_marginal = false;
  bool marginal_mle_split = false;
};

enum class AncillaryKind { profile_mle, median, midrange, sum };

// Shape of a dataset to be generated: size plus the covariate pattern for
// regression-style families.
struct DataShape {
  std::size_t n = 0;
  std::optional<std::vector<double>> z;
};

// Exponential structure of the conditional likelihood:
// log pc(x | t, psi) = psi * u(x) - B_n(psi) + h(x).
struct CondExpStruct {
  double u = 0.0;
  std::function<double(double)> B;
  std::function<double(double)> Bp;   // B'
  std::function<double(double)> Bpp;  // B''
};

// Declared factorization I11(lambda, psi) = g1(lambda) * g2(psi).
struct I11Factorization {
  std::function<double(double)> g1;
  std::function<double(double)> g2;
};

// Abstract two-parameter sampling family theta = (lambda, psi). All
// log-densities are exact (normalized); the factorization identity
// log_joint = log_marginal_ancillary + log_conditional holds without slack
// whenever `factorizable` is set.
//
// Instances are immutable after construction and safe to share across
// threads.
class Family {
 public:
  virtual ~Family() = default;

  virtual std::string id() const = 0;
  virtual FamilyFlags flags() const = 0;
  virtual AncillaryKind ancillary_kind() const = 0;
  virtual ParamDomain domain() const = 0;

  // Shape + support validation; throws std::domain_error.
  virtual void validate_data(const Dataset& data) const;
  void require_in_domain(const ParamPoint& theta) const;

  virtual double log_joint(const Dataset& data, const ParamPoint& theta) const = 0;

  // A bound evaluator with sufficient statistics precomputed; the returned
  // closure owns everything it needs.
  virtual std::function<double(double, double)> bind_log_joint(const Dataset& data) const;

  // log pm(t | lambda, psi) for a sample of size n, normalized as a density
  // (or pmf) in t.
  virtual double log_marginal_ancillary(double t, const ParamPoint& theta,
                                        std::size_t n) const;

  // log pc(x | t, psi); `lambda` must be supplied exactly when the
  // marginal-MLE split is in force and omitted otherwise.
  virtual double log_conditional(const Dataset& data, double t, double psi,
                                 std::optional<double> lambda = std::nullopt) const;

  virtual double ancillary(const Dataset& data) const;

  // argmax over lambda of log_joint at fixed psi. The base implementation is
  // a safeguarded 1-D search; families with closed forms override.
  virtual double profile_lambda(const Dataset& data, double psi) const;

  // Per-sample information scaled by n.
  virtual Mat2 fisher_info(const ParamPoint& theta, double n) const;

  // (1/2) log det I(theta); overridable for non-regular families carrying a
  // limiting convention.
  virtual double jeffreys_log(const ParamPoint& theta) const;

  virtual std::pair<double, double> canonical_of(const ParamPoint& theta) const;
  virtual ParamPoint from_canonical(double xi, double psi) const;

  // Dataset-aware variants for families whose canonical map needs the data
  // shape (the two-binomial group sizes); the defaults ignore the data.
  virtual std::pair<double, double> canonical_at(const Dataset& data,
                                                 const ParamPoint& theta) const;
  virtual ParamPoint from_canonical_at(const Dataset& data, double xi,
                                       double psi) const;

  // Interval of admissible lambda values given the data (differs from the
  // data-free envelope for the two-binomial family).
  virtual Interval lambda_domain(const Dataset& data) const;

  // -log pm(t | profile_lambda(psi), psi): the unnormalized log of the
  // profile-marginal-reciprocal prior. Families without a usable marginal
  // override with their limiting form.
  virtual double pml_log(const Dataset& data, double psi) const;

  // Bound evaluator with the data-dependent pieces precomputed; hot path for
  // posterior quadrature.
  virtual std::function<double(double)> bind_pml(const Dataset& data) const;

  virtual std::optional<CondExpStruct> conditional_exp_structure(const Dataset& data) const;
  virtual std::optional<I11Factorization> i11_factorization() const;

  // Integration/optimization transforms per coordinate.
  virtual Transform1D lambda_transform(const Dataset& data) const;
  virtual Transform1D psi_transform() const;

  // Moment-style starting point for optimizers and quadrature centering.
  virtual ParamPoint rough_start(const Dataset& data) const = 0;

  virtual Dataset sample(CounterRng& rng, const ParamPoint& theta,
                         const DataShape& shape) const = 0;

  // KL divergence between single observations; families without a closed
  // form raise capability_error and callers fall back to quadrature.
  virtual double kl_per_obs(const ParamPoint& a, const ParamPoint& b) const;

  // KL divergence for a size-n replicate (n x per-observation KL for iid
  // sampling; regression families account for the covariate pattern).
  virtual double kl_replicate(const ParamPoint& a, const ParamPoint& b,
                              const DataShape& shape) const;

  // Analytic derivatives of h(theta) = -log p(x|theta)/n where available.
  virtual bool has_analytic_h() const { return false; }
  virtual std::array<double, 2> h_gradient(const Dataset& data, const ParamPoint& theta) const;
  virtual Mat2 h_hessian(const Dataset& data, const ParamPoint& theta) const;

  // Per-observation log density, used by the generic KL quadrature fallback.
  virtual double log_pdf_obs(double x, const ParamPoint& theta) const;
  virtual Interval observation_support() const;
};

using FamilyPtr = std::shared_ptr<const Family>;

// Registry addressable by string id: "normal", "gamma", "invgauss",
// "two-binomial", "laplace", "exppower:<r>", "ls-normal", "uniform".
// ("strata:<inner>" is handled by the strata model, not here.)
FamilyPtr make_family(const std::string& id);
std::vector<std::string> family_registry_ids();

// Test-oracle path: profile maximizer computed by the generic 1-D search,
// bypassing any closed-form override.
double generic_profile_lambda(const Family& family, const Dataset& data, double psi);

}  // namespace mpml
