#include "mpml/util/special.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace mpml {

double lgamma_fn(double x) { return boost::math::lgamma(x); }

double digamma_fn(double x) { return boost::math::digamma(x); }

double trigamma_fn(double x) { return boost::math::trigamma(x); }

double polygamma2_fn(double x) { return boost::math::polygamma(2, x); }

double log_binom(double n, double k) {
  return lgamma_fn(n + 1.0) - lgamma_fn(k + 1.0) - lgamma_fn(n - k + 1.0);
}

double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kHalfLogTwoPi;
}

double normal_cdf(double x) {
  return 0.5 * boost::math::erfc(-x / std::sqrt(2.0));
}

double normal_logcdf(double x) {
  if (x > -8.0) return std::log(normal_cdf(x));
  // erfc asymptotics keep the deep lower tail finite.
  return std::log(0.5) + std::log(boost::math::erfc(-x / std::sqrt(2.0)));
}

}  // namespace mpml
