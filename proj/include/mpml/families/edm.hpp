#pragma once

#include <functional>

#include "mpml/family.hpp"
#include "mpml/util/fd.hpp"

namespace mpml {

// Building blocks of an exponential dispersion model:
//   log p(x|lambda,psi) =
//     psi * sum_i [ x_i c(lambda) - M(c(lambda)) - N(x_i) ]
//     + sum_i log a(x_i) + n k(psi)
// with canonical link c, convex cumulant M, conjugate N(x) = sup_eta {x eta -
// M(eta)}, carrier a and dispersion cumulant k. The mean of n draws is again
// of this form with dispersion n*psi, which gives the exact marginal factor
// of the sample mean.
struct EdmSpec {
  std::string id;
  Interval lambda_domain;
  Interval obs_support;

  std::function<double(double)> c, c1, c2, c3;  // link and derivatives
  std::function<double(double)> M, M1;          // cumulant in eta
  std::function<double(double)> c_inv;          // inverse link
  std::function<double(double)> N;              // convex conjugate of M
  std::function<double(double)> log_a;          // log carrier
  std::function<double(double)> k, k1, k2, k3;  // dispersion cumulant

  std::function<double(CounterRng&, const ParamPoint&)> draw;
  std::function<double(const ParamPoint&, const ParamPoint&)> kl_obs;  // optional
  std::function<double(const Dataset&)> rough_psi;
};

class EdmFamily : public Family {
 public:
  explicit EdmFamily(EdmSpec spec) : spec_(std::move(spec)) {}

  std::string id() const override { return spec_.id; }
  FamilyFlags flags() const override;
  AncillaryKind ancillary_kind() const override { return AncillaryKind::profile_mle; }
  ParamDomain domain() const override {
    return ParamDomain{spec_.lambda_domain, Interval{0.0, kInf}};
  }
  Interval observation_support() const override { return spec_.obs_support; }

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
  double pml_log(const Dataset& data, double psi) const override;
  std::function<double(double)> bind_pml(const Dataset& data) const override;
  std::optional<CondExpStruct> conditional_exp_structure(const Dataset& data) const override;
  std::optional<I11Factorization> i11_factorization() const override;
  ParamPoint rough_start(const Dataset& data) const override;
  Dataset sample(CounterRng& rng, const ParamPoint& theta,
                 const DataShape& shape) const override;
  double kl_per_obs(const ParamPoint& a, const ParamPoint& b) const override;
  double log_pdf_obs(double x, const ParamPoint& theta) const override;

  bool has_analytic_h() const override { return true; }
  std::array<double, 2> h_gradient(const Dataset& data, const ParamPoint& theta) const override;
  Mat2 h_hessian(const Dataset& data, const ParamPoint& theta) const override;
  Tensor3Sym h_third(const Dataset& data, const ParamPoint& theta) const;

  const EdmSpec& spec() const { return spec_; }

  // Dispersion cumulant pieces shared with the prior constructors.
  double k_of(double u) const { return spec_.k(u); }

 protected:
  struct Stats {
    std::size_t n = 0;
    double t1 = 0.0;     // sum x_i
    double tn = 0.0;     // sum N(x_i)
    double ta = 0.0;     // sum log a(x_i)
    double xbar = 0.0;
  };
  Stats stats(const Dataset& data) const;

  EdmSpec spec_;
};

EdmSpec normal_spec();
EdmSpec gamma_spec();
EdmSpec inverse_gaussian_spec();

// The normal family additionally carries the alternative split
// pc(x | t, lambda, psi) * pm(t | psi) with t the centered sum of squares
// (psi * t is chi-square with n - 1 degrees of freedom).
class NormalFamily : public EdmFamily {
 public:
  NormalFamily() : EdmFamily(normal_spec()) {}
  FamilyFlags flags() const override;
  double log_conditional(const Dataset& data, double t, double psi,
                         std::optional<double> lambda) const override;
  // log density of the split statistic t = sum (x_i - xbar)^2.
  double log_marginal_split_stat(double t, double psi, std::size_t n) const;
  double marginal_pml_log(const Dataset& data, double psi) const;
};

}  // namespace mpml
