#include <doctest.h>

#include <cmath>

#include "mpml/asymptotics.hpp"
#include "mpml/util/logspace.hpp"
#include "mpml/util/rng.hpp"
#include "mpml/util/solve1d.hpp"

using namespace mpml;

TEST_CASE("counter rng reproduces streams independent of interleaving") {
  CounterRng a(42, 7);
  std::vector<double> seq1;
  for (int i = 0; i < 16; ++i) seq1.push_back(a.uniform());
  CounterRng b1(42, 7), b2(42, 8);
  std::vector<double> seq2;
  for (int i = 0; i < 16; ++i) {
    seq2.push_back(b1.uniform());
    (void)b2.uniform();  // interleaved draws on another stream
  }
  CHECK(seq1 == seq2);
  CounterRng c(43, 7);
  CHECK(c.uniform() != seq1[0]);
}

TEST_CASE("rng moments are sane") {
  CounterRng rng(1, 0);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, sg = 0;
  for (int i = 0; i < n; ++i) {
    su += rng.uniform();
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    sg += rng.gamma(2.5);
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sn / n == doctest::Approx(0.0).epsilon(1.0).scale(0.01));
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(sg / n == doctest::Approx(2.5).epsilon(0.02));
}

TEST_CASE("inverse gaussian sampler matches mean and shape moments") {
  CounterRng rng(5, 0);
  const int n = 200000;
  double s = 0, sinv = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.inverse_gaussian(2.0, 3.0);
    s += x;
    sinv += 1.0 / x;
  }
  CHECK(s / n == doctest::Approx(2.0).epsilon(0.02));
  // E[1/x] = 1/mean + 1/shape.
  CHECK(sinv / n == doctest::Approx(0.5 + 1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("signed log accumulation handles cancellation") {
  LogSigned acc = LogSigned::zero();
  acc += LogSigned::from_value(3.5);
  acc += LogSigned::from_value(-1.25);
  acc += LogSigned::from_value(-2.25);
  CHECK(acc.value() == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  acc += LogSigned::from_value(-7.0);
  CHECK(acc.value() == doctest::Approx(-7.0).epsilon(1e-12));
}

TEST_CASE("scalar maximizer finds an interior maximum") {
  auto f = [](double x) { return -(x - 2.7) * (x - 2.7) + 1.0; };
  const MaxResult r = maximize_scalar(f, 0.0, -100.0, 100.0);
  CHECK(r.converged);
  CHECK(r.x == doctest::Approx(2.7).epsilon(1e-8));
}

TEST_CASE("bracketed newton solves a score equation") {
  auto g = [](double x) { return std::log(x) - 1.0; };
  auto gp = [](double x) { return 1.0 / x; };
  const RootResult r = newton_bracketed(g, gp, 0.1, 50.0);
  CHECK(r.converged);
  CHECK(r.x == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
}

TEST_CASE("order fit recovers exact power laws") {
  const std::vector<std::size_t> ns{8, 16, 32, 64, 128};
  std::vector<double> diffs;
  for (std::size_t n : ns) diffs.push_back(7.0 / (static_cast<double>(n) * n));
  const OrderFit fit = order_fit(ns, diffs);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.points_used == 5);

  std::vector<double> constant(ns.size(), 0.37);
  CHECK(order_fit(ns, constant).slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("order fit refuses fewer than four usable points") {
  const std::vector<std::size_t> ns{8, 16, 32, 64};
  const std::vector<double> diffs{0.1, 0.0, 0.0, 0.01};
  CHECK_THROWS_AS(order_fit(ns, diffs), config_error);
}
