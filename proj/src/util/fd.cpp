#include "mpml/util/fd.hpp"

#include <cmath>
#include <limits>

namespace mpml {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
const double kH1 = std::cbrt(kEps);           // first/second derivatives
const double kH3 = std::pow(kEps, 0.2);       // third derivatives

double central1(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// One Richardson extrapolation step: D(h), D(h/2) -> (4 D(h/2) - D(h)) / 3.
double richardson1(const std::function<double(double)>& f, double x, double h) {
  const double d1 = central1(f, x, h);
  const double d2 = central1(f, x, 0.5 * h);
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

std::array<double, 2> fd_gradient(const Fn2& f, double a, double b) {
  const double ha = kH1 * (1.0 + std::fabs(a));
  const double hb = kH1 * (1.0 + std::fabs(b));
  return {richardson1([&](double t) { return f(t, b); }, a, ha),
          richardson1([&](double t) { return f(a, t); }, b, hb)};
}

Mat2 fd_hessian(const Fn2& f, double a, double b) {
  const double ha = kH1 * (1.0 + std::fabs(a));
  const double hb = kH1 * (1.0 + std::fabs(b));
  const double f0 = f(a, b);
  Mat2 h;
  h.a11 = (f(a + ha, b) - 2.0 * f0 + f(a - ha, b)) / (ha * ha);
  h.a22 = (f(a, b + hb) - 2.0 * f0 + f(a, b - hb)) / (hb * hb);
  h.a12 = (f(a + ha, b + hb) - f(a + ha, b - hb) - f(a - ha, b + hb) +
           f(a - ha, b - hb)) /
          (4.0 * ha * hb);
  return h;
}

Tensor3Sym fd_third(const Fn2& f, double a, double b) {
  const double ha = kH3 * (1.0 + std::fabs(a));
  const double hb = kH3 * (1.0 + std::fabs(b));
  Tensor3Sym t;
  // Pure thirds: f''' = (f(x+2h) - 2 f(x+h) + 2 f(x-h) - f(x-2h)) / (2 h^3).
  t.t000 = (f(a + 2 * ha, b) - 2 * f(a + ha, b) + 2 * f(a - ha, b) -
            f(a - 2 * ha, b)) /
           (2 * ha * ha * ha);
  t.t111 = (f(a, b + 2 * hb) - 2 * f(a, b + hb) + 2 * f(a, b - hb) -
            f(a, b - 2 * hb)) /
           (2 * hb * hb * hb);
  // Mixed d^2/da^2 d/db as the centered b-difference of the a-second-difference.
  auto d2a = [&](double bb) {
    return (f(a + ha, bb) - 2.0 * f(a, bb) + f(a - ha, bb)) / (ha * ha);
  };
  t.t001 = (d2a(b + hb) - d2a(b - hb)) / (2.0 * hb);
  auto d2b = [&](double aa) {
    return (f(aa, b + hb) - 2.0 * f(aa, b) + f(aa, b - hb)) / (hb * hb);
  };
  t.t011 = (d2b(a + ha) - d2b(a - ha)) / (2.0 * ha);
  return t;
}

}  // namespace mpml
