#pragma once

#include "mpml/family.hpp"

namespace mpml {

// Uniform on (lambda - 1/psi, lambda + 1/psi): the heavy-tail-index limit of
// the power family. (x_(1), x_(n)) is sufficient; the MLE is the midrange
// and half-range, and all inference goes through closed forms because the
// support depends on the parameters.
class UniformFamily : public Family {
 public:
  std::string id() const override { return "uniform"; }
  FamilyFlags flags() const override;
  AncillaryKind ancillary_kind() const override { return AncillaryKind::midrange; }
  ParamDomain domain() const override {
    return ParamDomain{Interval{-kInf, kInf}, Interval{0.0, kInf}};
  }

  void validate_data(const Dataset& data) const override;
  double log_joint(const Dataset& data, const ParamPoint& theta) const override;
  double profile_lambda(const Dataset& data, double psi) const override;
  double jeffreys_log(const ParamPoint& theta) const override;
  double pml_log(const Dataset& data, double psi) const override;
  ParamPoint rough_start(const Dataset& data) const override;
  Dataset sample(CounterRng& rng, const ParamPoint& theta,
                 const DataShape& shape) const override;
  double kl_per_obs(const ParamPoint& a, const ParamPoint& b) const override;

  struct Accessors {
    double x_min = 0.0, x_max = 0.0;
    ParamPoint mle;  // midrange, 2 / range
  };
  static Accessors accessors(const Dataset& data);

  // Closed-form posterior means under the 1/psi prior with estimand
  // (psi lambda, psi): lambda -> midrange, psi -> 2(n-1)/((n+1) range).
  static double post_mean_psi(const Dataset& data);
  static double post_mean_lambda(const Dataset& data);
};

}  // namespace mpml
