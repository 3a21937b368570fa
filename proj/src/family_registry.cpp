#include <charconv>

#include "mpml/families/edm.hpp"
#include "mpml/families/location_scale.hpp"
#include "mpml/families/two_binomial.hpp"
#include "mpml/families/uniform.hpp"
#include "mpml/family.hpp"

namespace mpml {

FamilyPtr make_family(const std::string& id) {
  if (id == "normal") return std::make_shared<NormalFamily>();
  if (id == "gamma") return std::make_shared<EdmFamily>(gamma_spec());
  if (id == "invgauss") return std::make_shared<EdmFamily>(inverse_gaussian_spec());
  if (id == "two-binomial") return std::make_shared<TwoBinomialFamily>();
  if (id == "laplace") return std::make_shared<LocationScaleFamily>(laplace_spec());
  if (id == "ls-normal") return std::make_shared<LocationScaleFamily>(normal_base_spec());
  if (id == "uniform") return std::make_shared<UniformFamily>();
  if (id.rfind("exppower:", 0) == 0) {
    const std::string arg = id.substr(9);
    double r = 0.0;
    try {
      r = std::stod(arg);
    } catch (const std::exception&) {
      throw config_error("bad exponential power exponent '" + arg + "'");
    }
    return std::make_shared<LocationScaleFamily>(exponential_power_spec(r));
  }
  std::string known;
  for (const std::string& k : family_registry_ids()) known += " " + k;
  throw config_error("unknown family '" + id + "'; known families:" + known);
}

std::vector<std::string> family_registry_ids() {
  return {"normal",  "gamma",    "invgauss", "two-binomial",
          "laplace", "exppower:<r>", "ls-normal", "uniform"};
}

}  // namespace mpml
