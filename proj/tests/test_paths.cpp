#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/random/normal_distribution.hpp>

#include "obci/paths.hpp"
#include "obci/rng.hpp"

using namespace obci;

TEST_CASE("single increment is one normal draw") {
  const SeedSpec seed{7, 3};
  const WienerPath p = simulate_wiener(1.0, 1, seed);
  REQUIRE(p.grid_count() == 1);
  CHECK(p[0] == 0.0);
  Philox4x32 eng(seed);
  boost::random::normal_distribution<double> z;
  CHECK(p[1] == doctest::Approx(z(eng)).epsilon(1e-15));
}

TEST_CASE("paths are reproducible") {
  const WienerPath a = simulate_wiener(2.0, 512, {11, 5});
  const WienerPath b = simulate_wiener(2.0, 512, {11, 5});
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  const WienerPath c = simulate_wiener(2.0, 512, {11, 6});
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST_CASE("philox streams differ and repeat") {
  Philox4x32 a({1, 0}), b({1, 0}), c({1, 1}), d({2, 0});
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  Philox4x32 u({3, 4});
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform01();
    CHECK((v > 0.0 && v < 1.0));
  }
}

TEST_CASE("eval_at") {
  const WienerPath p(1.0, {0.0, 1.0, 2.0, 3.0, 4.0});
  CHECK(eval_at(p, 0.0) == 0.0);
  CHECK(eval_at(p, 1.0) == 4.0);
  CHECK(eval_at(p, 0.26) == 1.0);
  CHECK(p.index_of(0.125) == 0);
  CHECK_THROWS_AS(eval_at(p, 1.5), std::out_of_range);
}

TEST_CASE("injected path validation") {
  CHECK_THROWS(WienerPath(1.0, {1.0, 2.0}));
  CHECK_THROWS(WienerPath(1.0, {0.0}));
}

TEST_CASE("bridge integral vanishes on zero and linear paths") {
  const std::size_t n = 64;
  const WienerPath zero(2.0, std::vector<double>(2 * n + 1, 0.0));
  std::vector<double> lin(2 * n + 1);
  for (std::size_t k = 0; k < lin.size(); ++k) lin[k] = static_cast<double>(k) / n;
  const WienerPath line(2.0, lin);
  for (const auto& w : {WeightFunction::constant_sqrt12(), WeightFunction::quadratic()}) {
    CHECK(bridge_weight_integral(zero, 0.0, w) == 0.0);
    CHECK(bridge_weight_integral(line, 0.0, w) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bridge_weight_integral(line, 0.5, w) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("batched bridge integrals agree with the single version") {
  const WienerPath p = simulate_wiener(2.0, 256, {5, 0});
  for (const auto& w : {WeightFunction::constant_sqrt12(), WeightFunction::quadratic()}) {
    std::vector<double> out(128);
    bridge_weight_integrals(p, 128, w, out);
    for (std::size_t k = 0; k < out.size(); k += 17) {
      CHECK(out[k] == doctest::Approx(bridge_weight_integral(p, k / 128.0, w)).epsilon(1e-9));
    }
  }
}

TEST_CASE("weight lookup") {
  CHECK(WeightFunction::from_tag("constant-sqrt12").tag() == WeightFunction::constant_sqrt12().tag());
  CHECK(WeightFunction::constant_sqrt12()(0.3) == doctest::Approx(std::sqrt(12.0)));
  CHECK_THROWS_AS(WeightFunction::from_tag("nope"), std::invalid_argument);
}

TEST_CASE("increments pass a KS test against N(0, T/N)") {
  const std::size_t n = 10000;
  const double horizon = 2.5;
  const WienerPath p = simulate_wiener(horizon, n, {99, 1});
  const double sd = std::sqrt(horizon / n);
  std::vector<double> z(n);
  for (std::size_t k = 0; k < n; ++k) z[k] = (p[k + 1] - p[k]) / sd;
  std::sort(z.begin(), z.end());
  const boost::math::normal_distribution<double> std_normal;
  double dmax = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = boost::math::cdf(std_normal, z[k]);
    dmax = std::max({dmax, f - static_cast<double>(k) / n, static_cast<double>(k + 1) / n - f});
  }
  // p = 0.001 critical value of the asymptotic Kolmogorov distribution.
  CHECK(dmax * std::sqrt(static_cast<double>(n)) < 1.9495);
}

TEST_CASE("Monte Carlo moments") {
  const std::size_t reps = 100000;
  double s1 = 0.0, s2 = 0.0, b1 = 0.0, b2 = 0.0;
  const auto w = WeightFunction::constant_sqrt12();
  for (std::size_t r = 0; r < reps; ++r) {
    const WienerPath p = simulate_wiener(1.0, 64, {2024, r});
    s1 += p[64];
    s2 += p[64] * p[64];
    const double a = bridge_weight_integral(p, 0.0, w);
    b1 += a;
    b2 += a * a;
  }
  const double rd = static_cast<double>(reps);
  const double var_w = s2 / rd - (s1 / rd) * (s1 / rd);
  CHECK(var_w > 0.99);
  CHECK(var_w < 1.01);
  const double mean_b = b1 / rd;
  const double var_b = b2 / rd - mean_b * mean_b;
  CHECK(var_b > 0.97);
  CHECK(var_b < 1.03);
  CHECK(std::abs(mean_b) < 3.0 * std::sqrt(var_b / rd));
}
