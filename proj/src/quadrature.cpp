#include "mpml/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include "mpml/family.hpp"
#include "mpml/priors.hpp"

namespace mpml {

namespace {

double log1pexp_q(double v) {
  if (v > 35.0) return v;
  if (v < -35.0) return std::exp(v);
  return std::log1p(std::exp(v));
}

// 15-point Kronrod extension of 7-point Gauss (QUADPACK DQK15 constants).
constexpr int kNodes = 15;
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct NodeGrid {
  double t[kNodes];
  double wk[kNodes];
  double wgauss[kNodes];  // zero on Kronrod-only nodes
};

const NodeGrid& node_grid() {
  static const NodeGrid grid = [] {
    NodeGrid g{};
    for (int i = 0; i < 7; ++i) {
      g.t[i] = kXgk[i];
      g.t[14 - i] = -kXgk[i];
      g.wk[i] = kWgk[i];
      g.wk[14 - i] = kWgk[i];
      g.wgauss[i] = 0.0;
      g.wgauss[14 - i] = 0.0;
    }
    g.t[7] = 0.0;
    g.wk[7] = kWgk[7];
    g.wgauss[7] = kWg[3];
    for (int j = 0; j < 3; ++j) {
      g.wgauss[2 * j + 1] = kWg[j];
      g.wgauss[13 - 2 * j] = kWg[j];
    }
    return g;
  }();
  return grid;
}

struct Panel {
  double a = 0.0;
  double b = 0.0;
  int depth = 0;
  double logK = -kInf;     // log of the (positive) panel integral
  double log_dev = -kInf;  // log |K15 - G7| on the panel
  std::vector<LogSigned> extras;
};

// One evaluation point: the engine asks for the log-integrand and the signed
// multiplier values in a single callback, so nested integrals are computed
// once per node.
using NodeFn = std::function<double(double u, std::vector<double>* mult)>;

class Engine1D {
 public:
  Engine1D(NodeFn fn, std::size_t n_extras, const QuadratureConfig& cfg,
           std::string label)
      : fn_(std::move(fn)), n_extras_(n_extras), cfg_(cfg), label_(std::move(label)) {}

  Panel eval_panel(double a, double b, int depth) {
    const NodeGrid& g = node_grid();
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    double f[kNodes];
    std::vector<std::vector<double>> mult(n_extras_ > 0 ? kNodes : 0);
    double fmax = -kInf;
    std::vector<double> mbuf(n_extras_);
    for (int i = 0; i < kNodes; ++i) {
      const double u = c + hw * g.t[i];
      const double fi = fn_(u, n_extras_ > 0 ? &mbuf : nullptr);
      if (std::isnan(fi) || fi == kInf) {
        throw std::domain_error(label_ + ": non-finite log-integrand at interior point");
      }
      f[i] = fi;
      if (n_extras_ > 0) mult[i] = mbuf;
      if (fi > fmax) fmax = fi;
    }
    ++evals_;
    Panel p;
    p.a = a;
    p.b = b;
    p.depth = depth;
    p.extras.assign(n_extras_, LogSigned::zero());
    if (fmax == -kInf) return p;  // all mass zero on this panel
    double K = 0.0, G = 0.0;
    for (int i = 0; i < kNodes; ++i) {
      const double e = std::exp(f[i] - fmax);
      K += g.wk[i] * e;
      G += g.wgauss[i] * e;
    }
    const double scale = fmax + std::log(hw);
    p.logK = K > 0.0 ? scale + std::log(K) : -kInf;
    const double dev = std::fabs(K - G);
    p.log_dev = dev > 0.0 ? scale + std::log(dev) : -kInf;
    for (std::size_t k = 0; k < n_extras_; ++k) {
      double s = 0.0;
      for (int i = 0; i < kNodes; ++i) s += g.wk[i] * mult[i][k] * std::exp(f[i] - fmax);
      p.extras[k] = LogSigned::from_value(s).scaled_exp(scale);
    }
    return p;
  }

  // Integrate over the working domain. `u_dom` may be unbounded on either
  // side; `u_center` seeds the panel ladder.
  //
  // Unbounded directions get a curvature-scaled ladder of panels around the
  // located peak: panel widths grow geometrically away from the center, so a
  // Gaussian-like bulk is resolved to near machine precision in one pass and
  // the adaptive refinement below only fires for genuinely awkward shapes.
  // The ladder layout varies smoothly with the peak location and curvature,
  // which keeps nested integrals smooth in the outer variable.
  QuadMultiResult run(const Interval& u_dom, double u_center) {
    panels_.clear();
    evals_ = 0;

    const bool open_left = !std::isfinite(u_dom.lo);
    const bool open_right = !std::isfinite(u_dom.hi);
    if (!open_left && !open_right) {
      const int n0 = std::max(2, cfg_.initial_panels);
      for (int i = 0; i < n0; ++i) {
        const double a = u_dom.lo + (u_dom.hi - u_dom.lo) * i / n0;
        const double b = u_dom.lo + (u_dom.hi - u_dom.lo) * (i + 1) / n0;
        panels_.push_back(eval_panel(a, b, 0));
      }
    } else {
      const double u0 = locate_center(u_dom, u_center);
      const double sigma = local_scale(u0, u_dom);
      static const double kLadder[] = {0.0, 0.4, 0.8, 1.2, 1.7,  2.3,  3.0, 4.0,
                                       5.3, 7.0, 9.5, 13.0, 18.0, 25.0, 34.0, 46.0};
      constexpr int kSteps = sizeof(kLadder) / sizeof(kLadder[0]) - 1;
      double seed_lo = u0, seed_hi = u0;
      for (int i = 0; i < kSteps; ++i) {
        const double a = u0 + sigma * kLadder[i];
        const double b = u0 + sigma * kLadder[i + 1];
        if (a < u_dom.hi) {
          panels_.push_back(eval_panel(a, std::min(b, u_dom.hi), 0));
          seed_hi = std::min(b, u_dom.hi);
        }
        const double c = u0 - sigma * kLadder[i + 1];
        const double d = u0 - sigma * kLadder[i];
        if (d > u_dom.lo) {
          panels_.push_back(eval_panel(std::max(c, u_dom.lo), d, 0));
          seed_lo = std::max(c, u_dom.lo);
        }
      }
      if (open_right) extend_tail(seed_hi, +1.0, 4.0 * sigma);
      if (open_left) extend_tail(seed_lo, -1.0, 4.0 * sigma);
    }

    refine();
    return gather();
  }

  int evaluations() const { return evals_; }

 private:
  double locate_center(const Interval& u_dom, double hint) {
    const double lo = std::isfinite(u_dom.lo) ? u_dom.lo : -40.0;
    const double hi = std::isfinite(u_dom.hi) ? u_dom.hi : 40.0;
    double best_u = std::clamp(hint, lo, hi);
    double best_f = fn_(best_u, nullptr);
    if (best_f == -kInf) {
      // No usable hint: coarse scan for the mass.
      for (int i = 0; i <= 80; ++i) {
        const double u = lo + (hi - lo) * i / 80.0;
        const double f = fn_(u, nullptr);
        if (f > best_f) {
          best_f = f;
          best_u = u;
        }
      }
      if (best_f == -kInf) {
        throw std::domain_error(label_ +
                                ": integrand is identically zero on the scan grid");
      }
    }
    // Hill-climb polish so the ladder is centred on the bulk of the mass.
    double u = best_u;
    double step = 0.5;
    for (int it = 0; it < 40 && step > 5e-3; ++it) {
      const double up = std::clamp(u + step, lo, hi);
      const double dn = std::clamp(u - step, lo, hi);
      const double fu = fn_(up, nullptr);
      const double fd = fn_(dn, nullptr);
      if (fu > best_f && fu >= fd) {
        u = up;
        best_f = fu;
      } else if (fd > best_f) {
        u = dn;
        best_f = fd;
      } else {
        step *= 0.5;
      }
    }
    return u;
  }

  double local_scale(double u0, const Interval& u_dom) {
    const double h = 1e-3 * (1.0 + std::fabs(u0));
    const double f0 = fn_(u0, nullptr);
    const double fp = fn_(std::min(u0 + h, u_dom.hi), nullptr);
    const double fm = fn_(std::max(u0 - h, u_dom.lo), nullptr);
    const double d2 = (fp - 2.0 * f0 + fm) / (h * h);
    double sigma = (d2 < 0.0 && std::isfinite(d2)) ? 1.0 / std::sqrt(-d2) : 1.0;
    return std::clamp(sigma, 1e-3, 8.0);
  }

  void extend_tail(double from, double direction, double w0) {
    double pos = from;
    double w = std::clamp(w0, 0.25, 16.0);
    double prev_logK = kInf;
    int decay_streak = 0;
    for (int i = 0; i < cfg_.max_tail_panels; ++i) {
      const double next = pos + direction * w;
      const double a = direction > 0 ? pos : next;
      const double b = direction > 0 ? next : pos;
      Panel p = eval_panel(a, b, 0);
      panels_.push_back(p);
      const double logZ = current_logZ();
      const bool negligible =
          p.logK <= logZ + std::log(cfg_.rel_tol) - 7.0 || p.logK == -kInf;
      const bool decaying = p.logK <= prev_logK - 0.25 || p.logK == -kInf;
      decay_streak = decaying ? decay_streak + 1 : 0;
      if (negligible && decay_streak >= 2) return;
      prev_logK = p.logK;
      pos = next;
      w *= 2.0;
    }
    throw impropriety_error(
        label_ + ": tail mass does not decay after repeated extension",
        label_ + (direction > 0 ? " upper tail" : " lower tail"));
  }

  double current_logZ() const {
    double z = -kInf;
    for (const Panel& p : panels_) z = log_sum_exp(z, p.logK);
    return z;
  }

  void refine() {
    for (;;) {
      const double logZ = current_logZ();
      if (logZ == -kInf) return;
      double err = 0.0;
      int worst = -1;
      double worst_key = -kInf;
      for (std::size_t i = 0; i < panels_.size(); ++i) {
        if (panels_[i].log_dev == -kInf) continue;
        err += std::exp(panels_[i].log_dev - logZ);
        if (panels_[i].log_dev > worst_key && panels_[i].depth < cfg_.max_depth) {
          worst_key = panels_[i].log_dev;
          worst = static_cast<int>(i);
        }
      }
      if (err <= cfg_.rel_tol || std::exp(logZ) <= cfg_.abs_tol) {
        converged_ = true;
        return;
      }
      if (worst < 0 || static_cast<int>(panels_.size()) >= cfg_.max_panels) {
        converged_ = false;  // precision failure, flagged, never silent
        return;
      }
      const Panel p = panels_[worst];
      const double mid = 0.5 * (p.a + p.b);
      panels_[worst] = eval_panel(p.a, mid, p.depth + 1);
      panels_.push_back(eval_panel(mid, p.b, p.depth + 1));
    }
  }

  QuadMultiResult gather() {
    std::sort(panels_.begin(), panels_.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    QuadMultiResult res;
    res.numerators.assign(n_extras_, LogSigned::zero());
    double logZ = -kInf;
    for (const Panel& p : panels_) logZ = log_sum_exp(logZ, p.logK);
    res.log_denominator = logZ;
    for (const Panel& p : panels_) {
      for (std::size_t k = 0; k < n_extras_; ++k) res.numerators[k] += p.extras[k];
    }
    double err = 0.0;
    if (logZ != -kInf) {
      for (const Panel& p : panels_) {
        if (p.log_dev != -kInf) err += std::exp(p.log_dev - logZ);
      }
    }
    res.error_estimate = err;
    res.converged = converged_;
    res.evaluations = evals_ * kNodes;
    return res;
  }

  NodeFn fn_;
  std::size_t n_extras_;
  QuadratureConfig cfg_;
  std::string label_;
  std::vector<Panel> panels_;
  bool converged_ = true;
  int evals_ = 0;
};

}  // namespace

Transform1D Transform1D::for_interval(const Interval& dom) {
  if (dom.is_positive_halfline()) return log_tf();
  return identity_tf();
}

double Transform1D::x_of(double u) const {
  switch (kind) {
    case Kind::identity:
      return u;
    case Kind::log_positive:
      return std::exp(u);
    case Kind::bounded: {
      const double s = 1.0 / (1.0 + std::exp(-u));
      return a + (b - a) * s;
    }
    case Kind::custom:
      return custom_x_of(u);
  }
  return u;
}

double Transform1D::log_jac(double u) const {
  switch (kind) {
    case Kind::identity:
      return 0.0;
    case Kind::log_positive:
      return u;
    case Kind::bounded:
      return std::log(b - a) - u - 2.0 * log1pexp_q(-u);
    case Kind::custom:
      return custom_log_jac(u);
  }
  return 0.0;
}

std::optional<double> Transform1D::u_of(double x) const {
  switch (kind) {
    case Kind::identity:
      return x;
    case Kind::log_positive:
      return x > 0.0 ? std::optional<double>(std::log(x)) : std::nullopt;
    case Kind::bounded: {
      if (!(x > a && x < b)) return std::nullopt;
      const double s = (x - a) / (b - a);
      return std::log(s / (1.0 - s));
    }
    case Kind::custom:
      return std::nullopt;
  }
  return std::nullopt;
}

Interval Transform1D::u_domain(const Interval& x_dom) const {
  switch (kind) {
    case Kind::identity:
      return x_dom;
    case Kind::log_positive:
    case Kind::bounded:
    case Kind::custom:
      return Interval{-kInf, kInf};
  }
  return Interval{-kInf, kInf};
}

Quad1DResult integrate_1d(const std::function<double(double)>& log_f,
                          const Interval& dom, const QuadratureConfig& cfg,
                          std::optional<double> center_hint,
                          std::optional<Transform1D> transform,
                          const std::string& label) {
  const QuadMultiResult r =
      integrate_1d_multi(log_f, {}, dom, cfg, center_hint, transform, label);
  Quad1DResult out;
  out.log_value = r.log_denominator;
  out.error_estimate = r.error_estimate;
  out.converged = r.converged;
  out.evaluations = r.evaluations;
  return out;
}

QuadMultiResult integrate_1d_multi(
    const std::function<double(double)>& log_f,
    const std::vector<std::function<double(double)>>& multipliers,
    const Interval& dom, const QuadratureConfig& cfg,
    std::optional<double> center_hint, std::optional<Transform1D> transform,
    const std::string& label) {
  cfg.validate();
  const Transform1D tf = transform.value_or(Transform1D::for_interval(dom));
  NodeFn fn = [&](double u, std::vector<double>* mult) {
    const double x = tf.x_of(u);
    const double v = log_f(x) + tf.log_jac(u);
    if (mult != nullptr) {
      for (std::size_t k = 0; k < multipliers.size(); ++k) (*mult)[k] = multipliers[k](x);
    }
    return v;
  };
  Engine1D engine(fn, multipliers.size(), cfg, label);
  double u0 = 0.0;
  if (center_hint) u0 = tf.u_of(*center_hint).value_or(0.0);
  return engine.run(tf.u_domain(dom), u0);
}

PosteriorExpectation expect_2d(const Posterior2DSpec& spec,
                               const QuadratureConfig& cfg) {
  cfg.validate();
  const std::size_t ng = spec.estimands.size();
  double max_inner_err = 0.0;
  bool inner_ok = true;
  int inner_evals = 0;

  const Interval lam_u_dom = spec.lambda_tf.u_domain(spec.lambda_dom);

  NodeFn outer_fn = [&](double v, std::vector<double>* mult) {
    const double psi = spec.psi_tf.x_of(v);
    NodeFn inner_fn = [&](double u, std::vector<double>* inner_mult) {
      const double lam = spec.lambda_tf.x_of(u);
      const double val = spec.log_target(lam, psi) + spec.lambda_tf.log_jac(u);
      if (inner_mult != nullptr) {
        for (std::size_t k = 0; k < ng; ++k) (*inner_mult)[k] = spec.estimands[k](lam, psi);
      }
      return val;
    };
    Engine1D inner(inner_fn, ng, cfg, "lambda");
    const double lam_hint = spec.lambda_center ? spec.lambda_center(psi) : 0.0;
    const double u_hint = spec.lambda_tf.u_of(lam_hint).value_or(0.0);
    const QuadMultiResult ir = inner.run(lam_u_dom, u_hint);
    max_inner_err = std::max(max_inner_err, ir.error_estimate);
    inner_ok = inner_ok && ir.converged;
    inner_evals += ir.evaluations;
    if (mult != nullptr) {
      for (std::size_t k = 0; k < ng; ++k) {
        (*mult)[k] = ir.numerators[k].value_over_exp(ir.log_denominator);
      }
    }
    return ir.log_denominator + spec.psi_tf.log_jac(v);
  };

  Engine1D outer(outer_fn, ng, cfg, "psi");
  const double v_hint = spec.psi_tf.u_of(spec.psi_center).value_or(0.0);
  const QuadMultiResult orr = outer.run(spec.psi_tf.u_domain(spec.psi_dom), v_hint);

  PosteriorExpectation out;
  out.log_normalizer = orr.log_denominator;
  out.values.resize(ng);
  for (std::size_t k = 0; k < ng; ++k) {
    out.values[k] = orr.numerators[k].value_over_exp(orr.log_denominator);
  }
  out.rel_error = orr.error_estimate + max_inner_err;
  out.precision_ok = orr.converged && inner_ok;
  out.evaluations = orr.evaluations + inner_evals;
  if (!std::isfinite(out.log_normalizer)) {
    throw impropriety_error("posterior normalizer is not finite", "normalizer");
  }
  return out;
}

PosteriorExpectation posterior_expectation(
    const Family& family, const Dataset& data, const Prior& prior,
    const std::vector<std::function<double(double, double)>>& estimands,
    const QuadratureConfig& cfg, std::optional<ParamPoint> center_hint) {
  family.validate_data(data);
  Posterior2DSpec spec;
  const auto loglik = family.bind_log_joint(data);
  const Prior* pr = &prior;
  spec.log_target = [loglik, pr](double lam, double psi) {
    return loglik(lam, psi) + pr->log_at(ParamPoint{lam, psi});
  };
  spec.lambda_tf = family.lambda_transform(data);
  spec.psi_tf = family.psi_transform();
  spec.lambda_dom = family.lambda_domain(data);
  spec.psi_dom = family.domain().psi;
  auto fam = &family;
  auto data_copy = std::make_shared<Dataset>(data);
  spec.lambda_center = [fam, data_copy](double psi) {
    return fam->profile_lambda(*data_copy, psi);
  };
  spec.psi_center = center_hint ? center_hint->psi : family.rough_start(data).psi;
  spec.estimands = estimands;
  return expect_2d(spec, cfg);
}

}  // namespace mpml
