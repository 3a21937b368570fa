#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace mpml {

inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double vi : v)
    if (vi > m) m = vi;
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double vi : v) s += std::exp(vi - m);
  return m + std::log(s);
}

// A signed magnitude kept in log space: value = sign * exp(log_abs).
// sign == 0 encodes exact zero (log_abs = -inf by convention).
struct LogSigned {
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;

  static LogSigned zero() { return LogSigned{}; }

  static LogSigned from_value(double v) {
    if (v == 0.0) return zero();
    return LogSigned{std::log(std::fabs(v)), v > 0.0 ? 1 : -1};
  }

  static LogSigned from_log(double log_abs, int sign) {
    if (sign == 0 || log_abs == -std::numeric_limits<double>::infinity()) return zero();
    return LogSigned{log_abs, sign};
  }

  LogSigned& operator+=(const LogSigned& o) {
    if (o.sign == 0) return *this;
    if (sign == 0) {
      *this = o;
      return *this;
    }
    if (sign == o.sign) {
      log_abs = log_sum_exp(log_abs, o.log_abs);
      return *this;
    }
    // Opposite signs: subtract magnitudes.
    if (log_abs == o.log_abs) {
      *this = zero();
      return *this;
    }
    const bool mine_bigger = log_abs > o.log_abs;
    const double big = mine_bigger ? log_abs : o.log_abs;
    const double small = mine_bigger ? o.log_abs : log_abs;
    const double diff = small - big;  // <= 0
    const double l = big + std::log1p(-std::exp(diff));
    sign = mine_bigger ? sign : o.sign;
    log_abs = l;
    return *this;
  }

  // Multiply by exp(c).
  LogSigned scaled_exp(double c) const {
    if (sign == 0) return zero();
    return LogSigned{log_abs + c, sign};
  }

  double value() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_abs);
  }

  // value() / exp(log_denominator); safe when magnitudes are huge.
  double value_over_exp(double log_denominator) const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_abs - log_denominator);
  }
};

}  // namespace mpml
