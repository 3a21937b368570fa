#pragma once

#include <array>
#include <cstdint>

namespace mpml {

// Philox4x32-10 counter-based generator. A stream is keyed by
// (master seed, stream id); identical keys reproduce identical draws no
// matter how streams are scheduled, which is what makes paired Monte-Carlo
// comparisons and concurrent replication deterministic.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform on (0, 1): 53-bit mantissa, never exactly 0 or 1.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller (second value cached).
  double normal();
  double normal(double mean, double sd);

  double exponential();  // rate 1

  // Gamma with given shape, unit scale (Marsaglia-Tsang; shape < 1 boosted).
  double gamma(double shape);
  // Gamma with mean `mean` and shape `shape` (rate = shape / mean).
  double gamma_mean_shape(double mean, double shape);

  // Inverse Gaussian with mean `mean` and shape `shape`
  // (density ~ sqrt(shape/(2 pi x^3)) exp(-shape (x-mean)^2 / (2 mean^2 x))).
  double inverse_gaussian(double mean, double shape);

  int bernoulli(double p);
  int binomial(int n, double p);

 private:
  using ctr_t = std::array<std::uint32_t, 4>;
  using key_t = std::array<std::uint32_t, 2>;

  void refill();

  ctr_t counter_;
  key_t key_;
  std::array<std::uint64_t, 2> block_{};
  int block_pos_ = 2;  // force refill on first use
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace mpml
