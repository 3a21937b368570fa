#include "mpml/util/solve1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mpml {

namespace {
constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt(5)) / 2
}

MaxResult maximize_scalar(const std::function<double(double)>& f, double x0,
                          double lo, double hi, double xtol, int maxit,
                          bool expand) {
  double a = lo;
  double b = hi;

  if (expand) {
    // Walk outward from x0 until a local maximum is bracketed.
    double step = std::max(1e-4, 1e-3 * (1.0 + std::fabs(x0)));
    double xl = std::max(lo, x0 - step);
    double xr = std::min(hi, x0 + step);
    double fl = f(xl), f0 = f(x0), fr = f(xr);
    int guard = 0;
    while (!(f0 >= fl && f0 >= fr) && guard++ < 200) {
      if (fr > f0) {
        xl = x0; fl = f0;
        x0 = xr; f0 = fr;
        step *= 2.0;
        xr = std::min(hi, x0 + step);
        if (xr == x0) break;
        fr = f(xr);
      } else {
        xr = x0; fr = f0;
        x0 = xl; f0 = fl;
        step *= 2.0;
        xl = std::max(lo, x0 - step);
        if (xl == x0) break;
        fl = f(xl);
      }
    }
    a = xl;
    b = xr;
  }

  // Brent minimization of -f on [a, b].
  double x = std::clamp(x0, a, b);
  double w = x, v = x;
  double fx = -f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int it = 0;
  for (; it < maxit; ++it) {
    const double xm = 0.5 * (a + b);
    const double tol1 = xtol * (std::fabs(x) + 1.0) + 1e-300;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) break;
    bool parabolic_ok = false;
    if (std::fabs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      const double etmp = e;
      e = d;
      if (std::fabs(p) < std::fabs(0.5 * q * etmp) && p > q * (a - x) &&
          p < q * (b - x)) {
        parabolic_ok = true;
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (xm >= x) ? tol1 : -tol1;
      }
    }
    if (!parabolic_ok) {
      e = (x >= xm) ? a - x : b - x;
      d = kGolden * e;
    }
    const double u = (std::fabs(d) >= tol1) ? x + d : x + (d >= 0 ? tol1 : -tol1);
    const double fu = -f(u);
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }

  MaxResult res;
  res.x = x;
  res.fx = -fx;
  res.iterations = it;
  const double h = 1e-6 * (1.0 + std::fabs(x));
  const double xp = std::min(x + h, b), xmn = std::max(x - h, a);
  res.grad_norm = std::fabs((f(xp) - f(xmn)) / (xp - xmn));
  res.converged = it < maxit;
  return res;
}

RootResult newton_bracketed(const std::function<double(double)>& g,
                            const std::function<double(double)>& gprime,
                            double lo, double hi, double gtol, double xtol_rel,
                            int maxit) {
  double glo = g(lo);
  double ghi = g(hi);
  RootResult res;
  if (glo == 0.0) { res.x = lo; res.converged = true; return res; }
  if (ghi == 0.0) { res.x = hi; res.converged = true; return res; }
  if (glo * ghi > 0.0) { res.bracketed = false; return res; }

  double x = 0.5 * (lo + hi);
  for (int it = 0; it < maxit; ++it) {
    res.iterations = it + 1;
    const double gx = g(x);
    if (std::fabs(gx) <= gtol || (hi - lo) <= xtol_rel * (1.0 + std::fabs(x))) {
      res.x = x;
      res.converged = true;
      return res;
    }
    if ((gx > 0.0) == (glo > 0.0)) { lo = x; glo = gx; }
    else { hi = x; ghi = gx; }
    const double gp = gprime(x);
    double xn = (gp != 0.0 && std::isfinite(gp)) ? x - gx / gp : lo - 1.0;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    x = xn;
  }
  res.x = x;
  res.converged = (hi - lo) <= 1e-9 * (1.0 + std::fabs(x));
  return res;
}

RootResult bisect_root(const std::function<double(double)>& g, double lo,
                       double hi, double xtol_rel, int maxit) {
  double glo = g(lo);
  double ghi = g(hi);
  RootResult res;
  if (glo == 0.0) { res.x = lo; res.converged = true; return res; }
  if (ghi == 0.0) { res.x = hi; res.converged = true; return res; }
  if (glo * ghi > 0.0) { res.bracketed = false; return res; }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < maxit; ++it) {
    res.iterations = it + 1;
    // Secant proposal, safeguarded by the bracket.
    double xs = (ghi != glo) ? (lo * ghi - hi * glo) / (ghi - glo) : x;
    if (!(xs > lo && xs < hi)) xs = 0.5 * (lo + hi);
    x = (it % 2 == 0) ? xs : 0.5 * (lo + hi);
    const double gx = g(x);
    if (gx == 0.0 || (hi - lo) <= xtol_rel * (1.0 + std::fabs(x))) {
      res.x = x;
      res.converged = true;
      return res;
    }
    if ((gx > 0.0) == (glo > 0.0)) { lo = x; glo = gx; }
    else { hi = x; ghi = gx; }
  }
  res.x = 0.5 * (lo + hi);
  res.converged = true;
  return res;
}

bool expand_bracket(const std::function<double(double)>& g, double& lo,
                    double& hi, bool positive_axis, int max_expand) {
  double glo = g(lo);
  double ghi = g(hi);
  for (int i = 0; i < max_expand; ++i) {
    if (glo * ghi <= 0.0 && std::isfinite(glo) && std::isfinite(ghi)) return true;
    if (positive_axis) {
      lo *= 0.5;
      hi *= 2.0;
    } else {
      const double w = hi - lo;
      lo -= w;
      hi += w;
    }
    glo = g(lo);
    ghi = g(hi);
  }
  return false;
}

}  // namespace mpml
