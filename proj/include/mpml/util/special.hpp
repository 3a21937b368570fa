#pragma once

#include <cmath>

namespace mpml {

// Thin wrappers over well-tested special function implementations, so the
// rest of the code has one place to look. Relative accuracy is far better
// than the 1e-12 the priors and information matrices require.
double lgamma_fn(double x);
double digamma_fn(double x);
double trigamma_fn(double x);
// d^2/dx^2 digamma(x) = polygamma(2, x).
double polygamma2_fn(double x);

// log C(n, k) via lgamma.
double log_binom(double n, double k);

double normal_logpdf(double x, double mean, double sd);
double normal_cdf(double x);      // standard normal
double normal_logcdf(double x);   // stable in the lower tail

constexpr double kLogTwoPi = 1.8378770664093454836;
constexpr double kHalfLogTwoPi = 0.9189385332046727418;

}  // namespace mpml
