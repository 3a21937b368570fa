#pragma once

#include "mpml/family.hpp"

namespace mpml {

// Symmetric location-scale family p(x|lambda,psi) = prod C psi g(psi (x_i -
// lambda)) with inverse scale psi > 0. The ancillary statistic is the sample
// median (midpoint of the central pair for even n); its marginal density is
// the order-statistic density, so the profile-marginal prior comes out
// exactly lambda-flat and proportional to 1/psi.
struct LocationScaleSpec {
  std::string id;
  std::function<double(double)> log_g;  // log base density kernel, symmetric
  std::function<double(double)> G;      // cdf of the normalized base C g
  double log_C = 0.0;                   // normalizer: C g integrates to 1
  std::optional<double> r;              // exponent for the power subfamily
  bool regular = true;
  double j1 = 1.0;  // I11 = j1 psi^2 per observation
  double j2 = 1.0;  // I22 = j2 / psi^2 per observation
  std::function<double(CounterRng&)> draw_z;  // standardized draw
  // argmin over lambda of -sum log g(x_i - lambda); psi-free by scaling.
  std::function<double(const Dataset&)> location_estimate;
  std::function<double(const Dataset&, double)> psi_mle_given_lambda;
};

class LocationScaleFamily : public Family {
 public:
  explicit LocationScaleFamily(LocationScaleSpec spec) : spec_(std::move(spec)) {}

  std::string id() const override { return spec_.id; }
  FamilyFlags flags() const override;
  AncillaryKind ancillary_kind() const override { return AncillaryKind::median; }
  ParamDomain domain() const override {
    return ParamDomain{Interval{-kInf, kInf}, Interval{0.0, kInf}};
  }

  double log_joint(const Dataset& data, const ParamPoint& theta) const override;
  std::function<double(double, double)> bind_log_joint(const Dataset& data) const override;
  double log_marginal_ancillary(double t, const ParamPoint& theta,
                                std::size_t n) const override;
  double profile_lambda(const Dataset& data, double psi) const override;
  Mat2 fisher_info(const ParamPoint& theta, double n) const override;
  double pml_log(const Dataset& data, double psi) const override;
  ParamPoint rough_start(const Dataset& data) const override;
  Dataset sample(CounterRng& rng, const ParamPoint& theta,
                 const DataShape& shape) const override;
  double log_pdf_obs(double x, const ParamPoint& theta) const override;

  const LocationScaleSpec& spec() const { return spec_; }

 private:
  LocationScaleSpec spec_;
};

LocationScaleSpec laplace_spec();
LocationScaleSpec exponential_power_spec(double r);
LocationScaleSpec normal_base_spec();

// Order-statistic marginal log-density of the sample median at t. Odd n uses
// the closed display; even n reduces the joint density of the two central
// order statistics to a one-dimensional integral. Proportional to psi at
// t = lambda for both parities.
double median_marginal_logpdf(const LocationScaleSpec& spec, double t_med,
                              const ParamPoint& theta, std::size_t n);

}  // namespace mpml
