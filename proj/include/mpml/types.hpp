#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpml {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// A point theta = (lambda, psi) in a family's parameter space.
// lambda is the family's mean-like component, psi the precision/dispersion-like
// component of interest.
struct ParamPoint {
  double lambda = 0.0;
  double psi = 1.0;
};

// Open interval, possibly unbounded.
struct Interval {
  double lo = -kInf;
  double hi = kInf;
  bool contains(double v) const { return std::isfinite(v) && v > lo && v < hi; }
  bool is_positive_halfline() const { return lo == 0.0 && hi == kInf; }
  bool is_real_line() const { return lo == -kInf && hi == kInf; }
  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
};

struct ParamDomain {
  Interval lambda;
  Interval psi{0.0, kInf};
  bool contains(const ParamPoint& p) const {
    return lambda.contains(p.lambda) && psi.contains(p.psi);
  }
};

// A sample of size n >= 2 plus optional covariates and stratum labels.
struct Dataset {
  std::vector<double> x;
  std::optional<std::vector<double>> z;
  std::optional<std::vector<int>> stratum;

  std::size_t n() const { return x.size(); }
};

// Raised when an operation is not supported by a family (missing
// factorization, non-regular information, uncataloged closed form, ...).
class capability_error : public std::runtime_error {
 public:
  explicit capability_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an iterative routine fails to converge.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a posterior normalizer fails the tail-decay test. `tail` names
// the divergent direction, e.g. "psi lower tail".
class impropriety_error : public std::runtime_error {
 public:
  impropriety_error(const std::string& what, std::string tail)
      : std::runtime_error(what + " [" + tail + "]"), tail_(std::move(tail)) {}
  const std::string& tail() const { return tail_; }

 private:
  std::string tail_;
};

// Raised on malformed run configurations and input files.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Symmetric 2x2 matrix, used for Fisher information.
struct Mat2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  double det() const { return a11 * a22 - a12 * a12; }
  bool positive_definite() const { return a11 > 0.0 && det() > 0.0; }
  Mat2 inverse() const {
    const double d = det();
    if (d == 0.0) throw std::domain_error("Mat2::inverse: singular matrix");
    return Mat2{a22 / d, -a12 / d, a11 / d};
  }
};

// Basic structural validation shared by every family: n >= 2, covariate and
// stratum columns of matching length, non-degenerate covariate, per-stratum
// sizes >= 2.
void validate_dataset_shape(const Dataset& data);

// Summaries used all over the place.
double mean(const std::vector<double>& v);
double sum(const std::vector<double>& v);
// Midpoint-of-central-order-statistics convention for even n.
double median(std::vector<double> v);
double min_of(const std::vector<double>& v);
double max_of(const std::vector<double>& v);
// Sum of squared deviations from the mean.
double centered_sumsq(const std::vector<double>& v);

}  // namespace mpml
