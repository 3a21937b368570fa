#include "mpml/types.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace mpml {

void validate_dataset_shape(const Dataset& data) {
  if (data.n() < 2) {
    throw std::domain_error("dataset requires n >= 2, got n = " +
                            std::to_string(data.n()));
  }
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    if (!std::isfinite(data.x[i])) {
      throw std::domain_error("non-finite observation at row " + std::to_string(i));
    }
  }
  if (data.z) {
    if (data.z->size() != data.x.size()) {
      throw std::domain_error("covariate column length mismatch");
    }
    const double zbar = mean(*data.z);
    double ss = 0.0;
    for (double zi : *data.z) ss += (zi - zbar) * (zi - zbar);
    if (ss == 0.0) {
      throw std::domain_error("covariate column has zero variance");
    }
  }
  if (data.stratum) {
    if (data.stratum->size() != data.x.size()) {
      throw std::domain_error("stratum column length mismatch");
    }
    std::map<int, std::size_t> counts;
    for (int s : *data.stratum) ++counts[s];
    for (const auto& [label, cnt] : counts) {
      if (cnt < 2) {
        throw std::domain_error("stratum " + std::to_string(label) +
                                " has fewer than 2 observations");
      }
    }
  }
}

double sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

double mean(const std::vector<double>& v) {
  return sum(v) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double min_of(const std::vector<double>& v) {
  return *std::min_element(v.begin(), v.end());
}

double max_of(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end());
}

double centered_sumsq(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double xi : v) s += (xi - m) * (xi - m);
  return s;
}

}  // namespace mpml
