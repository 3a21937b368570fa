#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mpml/types.hpp"
#include "mpml/util/logspace.hpp"

namespace mpml {

class Family;
class Prior;

// Maps a working coordinate u (where panels live) to the model coordinate x.
// Unbounded positive coordinates always integrate under the log transform
// with the Jacobian folded into the log-integrand.
struct Transform1D {
  enum class Kind { identity, log_positive, bounded, custom };

  Kind kind = Kind::identity;
  double a = 0.0, b = 0.0;  // bounds for Kind::bounded
  std::function<double(double)> custom_x_of;
  std::function<double(double)> custom_log_jac;

  static Transform1D identity_tf() { return Transform1D{}; }
  static Transform1D log_tf() { return Transform1D{Kind::log_positive}; }
  static Transform1D bounded_tf(double lo, double hi) {
    Transform1D t;
    t.kind = Kind::bounded;
    t.a = lo;
    t.b = hi;
    return t;
  }
  static Transform1D custom_tf(std::function<double(double)> x_of,
                               std::function<double(double)> log_jac) {
    Transform1D t;
    t.kind = Kind::custom;
    t.custom_x_of = std::move(x_of);
    t.custom_log_jac = std::move(log_jac);
    return t;
  }
  // Default transform for an interval: finite -> identity on it, (0, inf) ->
  // log, real line -> identity.
  static Transform1D for_interval(const Interval& dom);

  double x_of(double u) const;
  double log_jac(double u) const;
  // Inverse map, used to place center hints. Not defined for custom kinds.
  std::optional<double> u_of(double x) const;
  // Working-coordinate domain.
  Interval u_domain(const Interval& x_dom) const;
};

struct QuadratureConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  int max_depth = 30;       // per-panel bisection depth
  int max_panels = 4000;
  int max_tail_panels = 64;
  int initial_panels = 8;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
      throw config_error("quadrature tolerances must be positive");
    }
    if (max_depth < 4) throw config_error("quadrature max depth must be >= 4");
  }
};

struct Quad1DResult {
  double log_value = -kInf;
  double error_estimate = 0.0;  // relative
  bool converged = true;
  int evaluations = 0;
};

// log of integral of exp(log_f) over `dom`, by adaptive Gauss-Kronrod panels
// accumulated in log space. Into unbounded directions the panel ladder keeps
// extending until the panel masses decay geometrically; if they do not, the
// integral is declared divergent (impropriety_error).
Quad1DResult integrate_1d(const std::function<double(double)>& log_f,
                          const Interval& dom, const QuadratureConfig& cfg,
                          std::optional<double> center_hint = std::nullopt,
                          std::optional<Transform1D> transform = std::nullopt,
                          const std::string& label = "integrand");

// Same engine, also accumulating integrals of m_k(x) exp(log_f(x)) for signed
// multiplier functions m_k on the shared panel set.
struct QuadMultiResult {
  double log_denominator = -kInf;
  std::vector<LogSigned> numerators;
  double error_estimate = 0.0;
  bool converged = true;
  int evaluations = 0;
};

QuadMultiResult integrate_1d_multi(
    const std::function<double(double)>& log_f,
    const std::vector<std::function<double(double)>>& multipliers,
    const Interval& dom, const QuadratureConfig& cfg,
    std::optional<double> center_hint = std::nullopt,
    std::optional<Transform1D> transform = std::nullopt,
    const std::string& label = "integrand");

// Two-dimensional posterior expectation machinery: iterated adaptive
// quadrature over transformed (lambda, psi) coordinates.
struct Posterior2DSpec {
  std::function<double(double, double)> log_target;  // (lambda, psi)
  Transform1D lambda_tf;
  Transform1D psi_tf;
  Interval lambda_dom;
  Interval psi_dom;
  // Center hints; lambda_center may depend on psi (profile maximizer).
  std::function<double(double)> lambda_center;
  double psi_center = 1.0;
  std::vector<std::function<double(double, double)>> estimands;
};

struct PosteriorExpectation {
  std::vector<double> values;
  double log_normalizer = -kInf;
  double rel_error = 0.0;
  bool precision_ok = true;
  int evaluations = 0;
};

PosteriorExpectation expect_2d(const Posterior2DSpec& spec,
                               const QuadratureConfig& cfg);

// Spec-level operation: E_post[g(lambda, psi)] under log_joint + prior with
// propriety enforced. `estimands` evaluate in the original parametrization.
PosteriorExpectation posterior_expectation(
    const Family& family, const Dataset& data, const Prior& prior,
    const std::vector<std::function<double(double, double)>>& estimands,
    const QuadratureConfig& cfg,
    std::optional<ParamPoint> center_hint = std::nullopt);

}  // namespace mpml
