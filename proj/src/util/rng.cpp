#include "mpml/util/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mpml {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

inline std::array<std::uint32_t, 4> philox10(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    philox_round(ctr, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) {
  key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  counter_ = {static_cast<std::uint32_t>(stream),
              static_cast<std::uint32_t>(stream >> 32), 0u, 0u};
}

void CounterRng::refill() {
  const auto out = philox10(counter_, key_);
  block_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  block_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  block_pos_ = 0;
  // 64-bit block counter in words 2..3.
  if (++counter_[2] == 0u) ++counter_[3];
}

std::uint64_t CounterRng::next_u64() {
  if (block_pos_ >= 2) refill();
  return block_[block_pos_++];
}

double CounterRng::uniform() {
  // Top 53 bits, offset by half an ulp so the result is in (0, 1).
  const std::uint64_t bits = next_u64() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double CounterRng::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(theta);
  have_cached_normal_ = true;
  return r * std::cos(theta);
}

double CounterRng::normal(double mean, double sd) { return mean + sd * normal(); }

double CounterRng::exponential() { return -std::log(uniform()); }

double CounterRng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::domain_error("gamma shape must be positive");
  if (shape < 1.0) {
    // Boost a shape < 1 draw from shape + 1.
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double CounterRng::gamma_mean_shape(double mean, double shape) {
  return gamma(shape) * mean / shape;
}

double CounterRng::inverse_gaussian(double mean, double shape) {
  const double z = normal();
  const double y = z * z;
  const double mu = mean;
  const double x1 = mu + mu * mu * y / (2.0 * shape) -
                    mu / (2.0 * shape) * std::sqrt(4.0 * mu * shape * y + mu * mu * y * y);
  const double u = uniform();
  if (u <= mu / (mu + x1)) return x1;
  return mu * mu / x1;
}

int CounterRng::bernoulli(double p) { return uniform() < p ? 1 : 0; }

int CounterRng::binomial(int n, double p) {
  int s = 0;
  for (int i = 0; i < n; ++i) s += bernoulli(p);
  return s;
}

}  // namespace mpml
