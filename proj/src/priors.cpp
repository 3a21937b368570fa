#include "mpml/priors.hpp"

#include <cmath>

#include "mpml/families/edm.hpp"
#include "mpml/families/strata.hpp"
#include "mpml/util/special.hpp"

namespace mpml {

namespace {

std::vector<double> domain_grid(const Interval& dom) {
  if (dom.is_positive_halfline()) return {0.3, 0.7, 1.0, 2.2, 5.0};
  if (dom.is_real_line()) return {-2.0, -0.5, 0.4, 1.3, 3.0};
  const double w = dom.hi - dom.lo;
  return {dom.lo + 0.15 * w, dom.lo + 0.35 * w, dom.lo + 0.55 * w,
          dom.lo + 0.75 * w, dom.lo + 0.9 * w};
}

void verify_i11_factorization(const Family& family, const I11Factorization& fac) {
  const ParamDomain dom = family.domain();
  const auto lams = domain_grid(dom.lambda);
  const auto psis = domain_grid(dom.psi);
  for (double lam : lams) {
    for (double psi : psis) {
      const double i11 = family.fisher_info(ParamPoint{lam, psi}, 1.0).a11;
      const double prod = fac.g1(lam) * fac.g2(psi);
      const double rel = std::fabs(i11 - prod) / std::max(std::fabs(i11), 1e-300);
      if (rel > 1e-8) {
        throw capability_error(family.id() +
                               ": declared I11 factorization fails on the check grid "
                               "(relative residual " +
                               std::to_string(rel) + ")");
      }
    }
  }
}

}  // namespace

std::string prior_kind_name(PriorKind kind) {
  switch (kind) {
    case PriorKind::PML: return "pml";
    case PriorKind::Jeffreys: return "jeffreys";
    case PriorKind::MPML: return "mpml";
    case PriorKind::AsymptoticMPML: return "ampml";
    case PriorKind::MarginalPML: return "marginal-pml";
    case PriorKind::MarginalMPML: return "marginal-mpml";
    case PriorKind::StrataMPML: return "strata-mpml";
    case PriorKind::UniformFlat: return "flat";
    case PriorKind::StoredReference: return "reference";
    case PriorKind::Custom: return "custom";
  }
  return "custom";
}

double Prior::log_at(const ParamPoint& theta) const {
  if (family_) family_->require_in_domain(theta);
  return eval_(theta);
}

Prior Prior::pml(FamilyPtr family, const Dataset& data) {
  family->validate_data(data);
  Prior p;
  p.kind_ = PriorKind::PML;
  p.family_id_ = family->id();
  p.n_ = data.n();
  p.t_ = family->ancillary(data);
  p.family_ = family;
  // Depends on psi only: the profile point, not theta.lambda, enters.
  auto bound = family->bind_pml(data);
  p.eval_ = [bound](const ParamPoint& th) { return bound(th.psi); };
  return p;
}

Prior Prior::jeffreys(FamilyPtr family) {
  Prior p;
  p.kind_ = PriorKind::Jeffreys;
  p.family_id_ = family->id();
  p.family_ = family;
  p.eval_ = [family](const ParamPoint& th) { return family->jeffreys_log(th); };
  return p;
}

Prior Prior::mpml(FamilyPtr family, const Dataset& data) {
  Prior pm = pml(family, data);
  Prior pj = jeffreys(family);
  Prior p;
  p.kind_ = PriorKind::MPML;
  p.family_id_ = family->id();
  p.n_ = pm.n_;
  p.t_ = pm.t_;
  p.family_ = family;
  auto em = pm.eval_;
  auto ej = pj.eval_;
  p.eval_ = [em, ej](const ParamPoint& th) { return em(th) + ej(th); };
  return p;
}

Prior Prior::asymptotic_mpml(FamilyPtr family) {
  const auto fac = family->i11_factorization();
  if (!fac) {
    throw capability_error(family->id() + ": no declared I11 factorization");
  }
  verify_i11_factorization(*family, *fac);
  Prior p;
  p.kind_ = PriorKind::AsymptoticMPML;
  p.family_id_ = family->id();
  p.family_ = family;
  auto g1 = fac->g1;
  p.eval_ = [family, g1](const ParamPoint& th) {
    const double i22 = family->fisher_info(th, 1.0).a22;
    return 0.5 * (std::log(g1(th.lambda)) + std::log(i22));
  };
  return p;
}

Prior Prior::marginal_pml(FamilyPtr family, const Dataset& data) {
  if (!family->flags().marginal_mle_split) {
    throw capability_error(family->id() + ": no marginal-MLE factorization");
  }
  const auto* nf = dynamic_cast<const NormalFamily*>(family.get());
  if (nf == nullptr) {
    throw capability_error(family->id() + ": marginal-MLE split not implemented");
  }
  family->validate_data(data);
  Prior p;
  p.kind_ = PriorKind::MarginalPML;
  p.family_id_ = family->id();
  p.n_ = data.n();
  p.family_ = family;
  auto data_copy = std::make_shared<Dataset>(data);
  p.eval_ = [family, nf, data_copy](const ParamPoint& th) {
    return nf->marginal_pml_log(*data_copy, th.psi);
  };
  return p;
}

Prior Prior::marginal_mpml(FamilyPtr family, const Dataset& data) {
  Prior pc = marginal_pml(family, data);
  Prior pj = jeffreys(family);
  Prior p;
  p.kind_ = PriorKind::MarginalMPML;
  p.family_id_ = family->id();
  p.n_ = data.n();
  p.family_ = family;
  auto ec = pc.eval_;
  auto ej = pj.eval_;
  p.eval_ = [ec, ej](const ParamPoint& th) { return ec(th) + ej(th); };
  return p;
}

Prior Prior::strata_mpml(FamilyPtr inner, const Dataset& data) {
  const StrataSpec spec = strata_spec_of(inner, data);
  Prior p;
  p.kind_ = PriorKind::StrataMPML;
  p.family_id_ = "strata:" + inner->id();
  p.n_ = data.n();
  p.family_ = inner;
  auto data_copy = std::make_shared<Dataset>(data);
  auto spec_copy = std::make_shared<StrataSpec>(spec);
  p.eval_ = [spec_copy, data_copy](const ParamPoint& th) {
    const std::vector<double> lambdas(spec_copy->K(), th.lambda);
    return strata_mpml_log(*spec_copy, *data_copy, lambdas, th.psi);
  };
  return p;
}

Prior Prior::flat() {
  Prior p;
  p.kind_ = PriorKind::UniformFlat;
  p.eval_ = [](const ParamPoint&) { return 0.0; };
  return p;
}

Prior Prior::stored_reference(const std::string& family_id, std::size_t n) {
  Prior p;
  p.kind_ = PriorKind::StoredReference;
  p.family_id_ = family_id;
  p.n_ = n;
  p.eval_ = [family_id, n](const ParamPoint& th) {
    return stored_reference_log(family_id, th, n);
  };
  return p;
}

Prior Prior::custom(std::function<double(const ParamPoint&)> log_fn, std::string name) {
  Prior p;
  p.kind_ = PriorKind::Custom;
  p.family_id_ = std::move(name);
  p.eval_ = std::move(log_fn);
  return p;
}

Prior Prior::product(const Prior& a, const Prior& b) {
  Prior p;
  p.kind_ = PriorKind::Custom;
  p.family_id_ = prior_kind_name(a.kind()) + "*" + prior_kind_name(b.kind());
  p.family_ = a.family_ ? a.family_ : b.family_;
  auto ea = a.eval_;
  auto eb = b.eval_;
  p.eval_ = [ea, eb](const ParamPoint& th) { return ea(th) + eb(th); };
  return p;
}

AsymptoticMpmlParts asymptotic_mpml_log(const Family& family,
                                        const ParamPoint& theta, double t) {
  const auto fac = family.i11_factorization();
  if (!fac) {
    throw capability_error(family.id() + ": no declared I11 factorization");
  }
  verify_i11_factorization(family, *fac);
  AsymptoticMpmlParts parts;
  const double i22 = family.fisher_info(theta, 1.0).a22;
  parts.ampml_log = 0.5 * (std::log(fac->g1(theta.lambda)) + std::log(i22));
  const double i11_at_t = family.fisher_info(ParamPoint{t, theta.psi}, 1.0).a11;
  parts.approx_pml_log = -0.5 * std::log(i11_at_t);
  return parts;
}

GammaGap gamma_reference_gap(double psi, std::size_t n) {
  if (!(psi > 0.0)) throw std::domain_error("gamma gap: psi must be positive");
  const double nn = static_cast<double>(n);
  const double npsi = nn * psi;
  GammaGap g;
  g.printed = lgamma_fn(npsi) - (nn - 0.5) * psi * std::log(npsi) + npsi;
  g.stirling = lgamma_fn(npsi) - (npsi - 0.5) * std::log(npsi) + npsi;
  return g;
}

double stored_reference_log(const std::string& family_id, const ParamPoint& theta,
                            std::size_t n) {
  const double lam = theta.lambda;
  const double psi = theta.psi;
  if (family_id == "normal") return -std::log(psi);
  if (family_id == "invgauss") return -1.5 * std::log(lam) - 0.5 * std::log(psi);
  if (family_id == "gamma") {
    // Quoted relation: reference = MPML * exp f(psi, n), with the
    // Stirling-consistent reading of f.
    const double npsi = static_cast<double>(n) * psi;
    const double jeff =
        -std::log(lam) + 0.5 * std::log(psi * (trigamma_fn(psi) - 1.0 / psi));
    const double pml = -(npsi * std::log(npsi) - npsi - lgamma_fn(npsi));
    return jeff + pml + gamma_reference_gap(psi, n).stirling;
  }
  throw capability_error("no stored reference prior for family '" + family_id + "'");
}

Prior make_prior(const std::string& kind, FamilyPtr family,
                 const std::optional<Dataset>& data) {
  auto need_data = [&](const char* what) -> const Dataset& {
    if (!data) {
      throw config_error(std::string(what) +
                         " prior is data-dependent; a dataset (or generator) is required");
    }
    return *data;
  };
  if (kind == "pml") return Prior::pml(family, need_data("pml"));
  if (kind == "jeffreys") return Prior::jeffreys(family);
  if (kind == "mpml") return Prior::mpml(family, need_data("mpml"));
  if (kind == "ampml") return Prior::asymptotic_mpml(family);
  if (kind == "marginal-pml") return Prior::marginal_pml(family, need_data("marginal-pml"));
  if (kind == "marginal-mpml")
    return Prior::marginal_mpml(family, need_data("marginal-mpml"));
  if (kind == "strata-mpml") return Prior::strata_mpml(family, need_data("strata-mpml"));
  if (kind == "flat") return Prior::flat();
  if (kind == "reference") {
    const std::size_t n = data ? data->n() : 1;
    return Prior::stored_reference(family->id(), n);
  }
  std::string known;
  for (const std::string& k : prior_registry_ids()) known += " " + k;
  throw config_error("unknown prior '" + kind + "'; known priors:" + known);
}

std::vector<std::string> prior_registry_ids() {
  return {"pml",          "jeffreys",     "mpml",  "ampml",    "marginal-pml",
          "marginal-mpml", "strata-mpml", "flat",  "reference"};
}

}  // namespace mpml
