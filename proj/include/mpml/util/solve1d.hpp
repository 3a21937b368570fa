#pragma once

#include <functional>

namespace mpml {

struct MaxResult {
  double x = 0.0;
  double fx = 0.0;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;  // |f'| estimate at the solution (finite difference)
};

// Maximize a smooth unimodal-ish function on (lo, hi) by golden-section /
// parabolic interpolation (Brent). `lo`/`hi` may be guesses; the bracket is
// expanded geometrically around `x0` first when expand = true.
MaxResult maximize_scalar(const std::function<double(double)>& f, double x0,
                          double lo, double hi, double xtol = 1e-12,
                          int maxit = 200, bool expand = true);

struct RootResult {
  double x = 0.0;
  bool converged = false;
  int iterations = 0;
  bool bracketed = true;
};

// Safeguarded Newton for g(x) = 0 on a bracket [lo, hi] with g(lo), g(hi) of
// opposite sign. Falls back to bisection whenever the Newton step leaves the
// bracket or the derivative is unusable. Convergence once |g| <= gtol or the
// bracket width <= xtol_rel * (1 + |x|).
RootResult newton_bracketed(const std::function<double(double)>& g,
                            const std::function<double(double)>& gprime,
                            double lo, double hi, double gtol = 1e-12,
                            double xtol_rel = 1e-13, int maxit = 200);

// Bisection-only variant for score functions without a cheap derivative.
RootResult bisect_root(const std::function<double(double)>& g, double lo,
                       double hi, double xtol_rel = 1e-13, int maxit = 300);

// Grow a bracket (multiplicatively on a positive axis, additively otherwise)
// until g changes sign. Returns false if no sign change was found.
bool expand_bracket(const std::function<double(double)>& g, double& lo,
                    double& hi, bool positive_axis, int max_expand = 200);

}  // namespace mpml
