#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "obci/cip.hpp"
#include "obci/rng.hpp"

using namespace obci;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  Philox4x32 eng({seed, 0});
  boost::random::normal_distribution<double> z;
  std::vector<double> x(n);
  for (auto& v : x) v = z(eng);
  return x;
}

}  // namespace

TEST_CASE("variance estimators on {0,0,2,2}") {
  const TimeSeriesData data({0, 0, 2, 2});
  const auto layout = make_layout(4, 2, 2);
  const auto mean = mean_estimator();
  const auto be = batch_estimates(data, layout, *mean);
  const auto v1 = var_ob1(be, layout);
  CHECK(v1.value == doctest::Approx(4.0));
  CHECK(v1.kappa_used == 0.5);
  const auto v2 = var_ob2(be, layout, BatchCount::finite(2));
  CHECK(v2.value * v2.kappa_used == doctest::Approx(v1.value * v1.kappa_used));
  const auto v2i = var_ob2(be, layout, BatchCount::infinite());
  CHECK(v2i.value == doctest::Approx(6.0));
}

TEST_CASE("area estimator hand value") {
  const TimeSeriesData data({1, 3, 1, 3});
  const auto v = var_ob3(data, make_layout(4, 2, 2), *mean_estimator(),
                         WeightFunction::constant_sqrt12());
  CHECK(v.value == doctest::Approx(1.5));
}

TEST_CASE("constant series gives zero variance and a degenerate interval") {
  const TimeSeriesData data(std::vector<double>(40, 2.0));
  const auto layout = make_layout(40, 10, 1);
  const auto mean = mean_estimator();
  const auto be = batch_estimates(data, layout, *mean);
  CHECK(var_ob1(be, layout).value == 0.0);
  CHECK(var_ob2(be, layout, BatchCount::infinite()).value == 0.0);
  CHECK(var_ob3(data, layout, *mean, WeightFunction::constant_sqrt12()).value == 0.0);
  FixedCriticalValue t(2.0);
  for (Procedure p : {Procedure::ob1, Procedure::ob2, Procedure::ob3}) {
    IntervalSpec spec;
    spec.method = p;
    spec.m = 10;
    CHECK_THROWS_AS(build_interval(data, *mean, spec, t), DegenerateInterval);
  }
}

TEST_CASE("area estimator skips prefixes below the minimum window") {
  const TimeSeriesData data({1, 2, 4, 3});
  const auto v = var_ob3(data, make_layout(4, 2, 1), *ar1_estimator(),
                         WeightFunction::constant_sqrt12());
  CHECK(v.value == 0.0);
}

TEST_CASE("half width is t sigma / sqrt(n)") {
  const TimeSeriesData data(normals(100, 3));
  IntervalSpec spec;
  spec.method = Procedure::ob1;
  spec.m = 25;
  spec.regime = BatchRegime::large;
  FixedCriticalValue t(2.0);
  const auto r = build_interval(data, *mean_estimator(), spec, t);
  CHECK(r.critical_value_used == 2.0);
  CHECK(r.half_width == doctest::Approx(2.0 * r.sigma_hat / 10.0));
  CHECK(r.lower == doctest::Approx(r.center - r.half_width));
  CHECK(r.upper == doctest::Approx(r.center + r.half_width));
  CHECK(r.diagnostics.b == 76);
  CHECK(r.diagnostics.beta == 0.25);
  CHECK(r.covers(r.center));
}

TEST_CASE("small-batch regime uses the normal quantile") {
  const TimeSeriesData data(normals(400, 4));
  IntervalSpec spec;
  spec.method = Procedure::ob1;
  spec.m = 20;
  FixedCriticalValue t(99.0);
  const auto r = build_interval(data, *mean_estimator(), spec, t);
  CHECK(r.diagnostics.small_batch);
  CHECK(r.critical_value_used == doctest::Approx(1.959963985));
  spec.regime = BatchRegime::large;
  CHECK(build_interval(data, *mean_estimator(), spec, t).critical_value_used == 99.0);
}

TEST_CASE("one-sided intervals") {
  const TimeSeriesData data(normals(200, 5));
  IntervalSpec spec;
  spec.method = Procedure::ob1;
  spec.m = 50;
  spec.sides = Sidedness::lower_bound;
  FixedCriticalValue t(1.7);
  const auto lo = build_interval(data, *mean_estimator(), spec, t);
  CHECK(std::isinf(lo.upper));
  CHECK(lo.lower == doctest::Approx(lo.center - lo.half_width));
  spec.sides = Sidedness::upper_bound;
  const auto hi = build_interval(data, *mean_estimator(), spec, t);
  CHECK(std::isinf(hi.lower));
  CHECK(hi.lower < 0);
}

TEST_CASE("OB-II centers on the batching mean") {
  const TimeSeriesData data(normals(100, 6));
  IntervalSpec spec;
  spec.method = Procedure::ob2;
  spec.m = 25;
  spec.d = 5;
  FixedCriticalValue t(2.0);
  const auto r = build_interval(data, *mean_estimator(), spec, t);
  const auto be = batch_estimates(data, make_layout(100, 25, 5), *mean_estimator());
  CHECK(r.center == be.batching_mean);
  CHECK(r.point_estimate == be.sectioning);
}

TEST_CASE("scale equivariance") {
  const auto x = normals(300, 8);
  std::vector<double> y(x);
  for (auto& v : y) v *= 3.5;
  const TimeSeriesData dx(x), dy(y);
  FixedCriticalValue t(2.1);
  for (Procedure p : {Procedure::ob1, Procedure::ob2, Procedure::ob3}) {
    IntervalSpec spec;
    spec.method = p;
    spec.m = 75;
    spec.d = 3;
    const auto a = build_interval(dx, *mean_estimator(), spec, t);
    const auto b = build_interval(dy, *mean_estimator(), spec, t);
    CHECK(b.sigma_hat == doctest::Approx(3.5 * a.sigma_hat));
    CHECK(b.center == doctest::Approx(3.5 * a.center));
    CHECK(b.half_width == doctest::Approx(3.5 * a.half_width));
    CHECK(a.covers(0.01) == b.covers(0.035));
  }
}

TEST_CASE("b_inf classification") {
  CHECK(classify_b_inf(make_layout(1000, 250, 1)).is_infinite());
  CHECK(classify_b_inf(make_layout(1000, 250, 31)).is_infinite());
  CHECK(classify_b_inf(make_layout(1000, 250, 250)) == BatchCount::finite(4));
  CHECK(classify_b_inf(make_layout(1000, 250, 500)) == BatchCount::finite(2));
}

TEST_CASE("table source warns on a wide beta gap") {
  CriticalValueTable table;
  table.add({Procedure::ob1, 0.25, BatchCount::infinite(), 0.975, 2.4, 10000, 256, 1});
  std::ostringstream warn;
  TableCriticalValues src(table, &warn);
  const auto w = WeightFunction::constant_sqrt12();
  CHECK(src.value(Procedure::ob1, 0.255, BatchCount::infinite(), 0.975, w) == 2.4);
  CHECK(warn.str().empty());
  CHECK(src.value(Procedure::ob1, 0.3, BatchCount::infinite(), 0.975, w) == 2.4);
  CHECK(warn.str().find("warning") != std::string::npos);
  CHECK_THROWS(src.value(Procedure::ob2, 0.25, BatchCount::infinite(), 0.975, w));
}

TEST_CASE("on-demand source caches rounded values") {
  OnDemandCriticalValues src(10000, 128, 42);
  const auto w = WeightFunction::constant_sqrt12();
  const double a = src.value(Procedure::ob1, 0.25, BatchCount::infinite(), 0.975, w);
  CHECK(a == round_significant6(a));
  CHECK(src.value(Procedure::ob1, 0.25, BatchCount::infinite(), 0.975, w) == a);
  LimitConfig c;
  c.asym.beta = 0.25;
  c.replications = 10000;
  c.grid = 128;
  c.seed = 42;
  CHECK(round_significant6(critical_value(c, 0.975).value) == a);
}

TEST_CASE("interval line format") {
  IntervalResult r;
  r.lower = -0.2;
  r.center = 0;
  r.upper = 0.2;
  r.half_width = 0.2;
  r.sigma_hat = 1;
  r.critical_value_used = 2;
  r.diagnostics.beta = 0.25;
  r.diagnostics.b = 751;
  CHECK(format_interval_line(r) == "-0.2,0,0.2,0.2,1,2,0.25,751,inf");
}

TEST_CASE("var_ob1 is finite and nonnegative on iid data") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const TimeSeriesData data(normals(200, 100 + s));
    for (std::size_t m : {2u, 10u, 50u, 100u}) {
      const auto layout = make_layout(200, m, 1);
      const auto v = var_ob1(batch_estimates(data, layout, *mean_estimator()), layout);
      CHECK(std::isfinite(v.value));
      CHECK(v.value >= 0.0);
    }
  }
}

TEST_CASE("ss is rejected by build_interval") {
  const TimeSeriesData data(normals(100, 9));
  IntervalSpec spec;
  spec.method = Procedure::ss;
  spec.m = 10;
  FixedCriticalValue t(2.0);
  CHECK_THROWS_AS(build_interval(data, *mean_estimator(), spec, t), std::invalid_argument);
}
