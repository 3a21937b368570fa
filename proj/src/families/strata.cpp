#include "mpml/families/strata.hpp"

#include <cmath>
#include <map>

#include "mpml/util/solve1d.hpp"

namespace mpml {

std::vector<Dataset> split_strata(const Dataset& data) {
  if (!data.stratum) {
    throw std::domain_error("strata: dataset has no stratum column");
  }
  std::map<int, Dataset> groups;
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    Dataset& g = groups[(*data.stratum)[i]];
    g.x.push_back(data.x[i]);
    if (data.z) {
      if (!g.z) g.z = std::vector<double>();
      g.z->push_back((*data.z)[i]);
    }
  }
  std::vector<Dataset> out;
  out.reserve(groups.size());
  for (auto& [label, g] : groups) out.push_back(std::move(g));
  return out;
}

StrataSpec strata_spec_of(const FamilyPtr& inner, const Dataset& data) {
  StrataSpec spec;
  spec.inner = inner;
  for (const Dataset& g : split_strata(data)) {
    if (g.n() < 2) throw std::domain_error("strata: every stratum needs n_k >= 2");
    spec.sizes.push_back(g.n());
  }
  if (spec.sizes.empty()) throw std::domain_error("strata: no strata found");
  return spec;
}

double strata_log_joint(const StrataSpec& spec, const Dataset& data,
                        const std::vector<double>& lambdas, double psi) {
  const std::vector<Dataset> groups = split_strata(data);
  if (lambdas.size() != groups.size()) {
    throw std::domain_error("strata: lambda vector length must equal the stratum count");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    acc += spec.inner->log_joint(groups[k], ParamPoint{lambdas[k], psi});
  }
  return acc;
}

namespace {

double maximize_psi(const std::function<double(double)>& obj, double psi0,
                    const Interval& dom) {
  const Transform1D tf = Transform1D::for_interval(dom);
  auto f = [&](double u) { return obj(tf.x_of(u)); };
  const double u0 = tf.u_of(psi0).value_or(0.0);
  const Interval u_dom = tf.u_domain(dom);
  const MaxResult res = maximize_scalar(f, u0, u_dom.lo, u_dom.hi, 1e-13, 300);
  if (!res.converged) {
    throw convergence_error("strata: psi maximization did not converge");
  }
  return tf.x_of(res.x);
}

}  // namespace

double strata_psi_mle(const StrataSpec& spec, const Dataset& data) {
  const std::vector<Dataset> groups = split_strata(data);
  std::vector<std::function<double(double, double)>> logliks;
  std::vector<double> lambda_hats;
  for (const Dataset& g : groups) {
    logliks.push_back(spec.inner->bind_log_joint(g));
    lambda_hats.push_back(spec.inner->profile_lambda(g, 1.0));
  }
  auto obj = [&](double psi) {
    double acc = 0.0;
    for (std::size_t k = 0; k < groups.size(); ++k) {
      // Estimation-orthogonal inner families: the profile maximizer is
      // psi-free, so profiling out lambda_k is exact.
      acc += logliks[k](lambda_hats[k], psi);
    }
    return acc;
  };
  double psi0 = spec.inner->rough_start(groups[0]).psi;
  if (!std::isfinite(psi0) || psi0 <= 0.0) psi0 = 1.0;
  return maximize_psi(obj, psi0, spec.inner->domain().psi);
}

double strata_psi_cml(const StrataSpec& spec, const Dataset& data) {
  const std::vector<Dataset> groups = split_strata(data);
  std::vector<double> us;
  std::vector<CondExpStruct> structs;
  for (const Dataset& g : groups) {
    auto ces = spec.inner->conditional_exp_structure(g);
    if (!ces) {
      throw capability_error("strata: inner family has no conditional factorization");
    }
    structs.push_back(*ces);
  }
  auto obj = [&](double psi) {
    double acc = 0.0;
    for (const CondExpStruct& s : structs) acc += psi * s.u - s.B(psi);
    return acc;
  };
  double psi0 = spec.inner->rough_start(groups[0]).psi;
  if (!std::isfinite(psi0) || psi0 <= 0.0) psi0 = 1.0;
  return maximize_psi(obj, psi0, spec.inner->domain().psi);
}

double strata_mpml_log(const StrataSpec& spec, const Dataset& data,
                       const std::vector<double>& lambdas, double psi) {
  const std::vector<Dataset> groups = split_strata(data);
  if (lambdas.size() != groups.size()) {
    throw std::domain_error("strata: lambda vector length must equal the stratum count");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    acc += spec.inner->pml_log(groups[k], psi) +
           spec.inner->jeffreys_log(ParamPoint{lambdas[k], psi});
  }
  return acc;
}

Dataset sample_strata(CounterRng& rng, const StrataSpec& spec,
                      const std::vector<double>& lambdas, double psi) {
  if (lambdas.size() != spec.K()) {
    throw std::domain_error("strata: lambda vector length must equal the stratum count");
  }
  Dataset d;
  d.stratum = std::vector<int>();
  for (std::size_t k = 0; k < spec.K(); ++k) {
    DataShape shape;
    shape.n = spec.sizes[k];
    const Dataset g = spec.inner->sample(rng, ParamPoint{lambdas[k], psi}, shape);
    for (double xi : g.x) {
      d.x.push_back(xi);
      d.stratum->push_back(static_cast<int>(k));
    }
  }
  return d;
}

}  // namespace mpml
