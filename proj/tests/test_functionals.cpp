#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "obci/common.hpp"
#include "obci/functionals.hpp"

using namespace obci;

namespace {

double est(const EstimatorPtr& e, std::vector<double> v) { return e->estimate(v); }

}  // namespace

TEST_CASE("mean") {
  const auto m = mean_estimator();
  CHECK(est(m, {1, 2, 3}) == 2);
  CHECK(est(m, {4.5}) == 4.5);
  CHECK(est(m, {0, 0, 2, 2}) == 1);
}

TEST_CASE("quantile") {
  CHECK(est(quantile_estimator(0.5), {3, 1, 2}) == 2);
  CHECK(est(quantile_estimator(0.3), {5}) == 5);
  CHECK(est(quantile_estimator(0.75), {1, 2, 3, 4}) == 3);
  CHECK(quantile_rank(0.7, 10) == 7);
  CHECK(quantile_rank(0.1, 3) == 1);
  CHECK(quantile_rank(0.999, 3) == 3);
}

TEST_CASE("cvar") {
  CHECK(est(cvar_estimator(0.5, CvarKnownQuantile{0.0}), {-1, 1}) == 1);
  CHECK_THROWS_AS(est(cvar_estimator(0.5, CvarKnownQuantile{5.0}), {1, 2, 3}),
                  DegenerateEstimate);
  // plug-in q is the 2nd order statistic
  CHECK(est(cvar_estimator(0.5), {4, 1, 3, 2}) == doctest::Approx((2 + 3 + 4) / 2.0));
}

TEST_CASE("ar1") {
  const auto a = ar1_estimator();
  CHECK(est(a, {1, 0.5, 0.25}) == doctest::Approx(0.5));
  CHECK(est(a, {1, 1}) == 1);
  CHECK_THROWS_AS(est(a, {0, 0, 0}), DegenerateEstimate);
  CHECK(a->min_window() == 2);
}

TEST_CASE("nhpp rate") {
  const auto r = nhpp_rate_estimator(1e-4);
  CHECK(est(r, {0, 0, 1, 0}) == doctest::Approx(2500));
  CHECK(est(r, {0, 0, 0}) == 0);
  CHECK_THROWS_AS(est(r, {0, -1}), std::invalid_argument);
  CHECK_THROWS_AS(nhpp_rate_estimator(0.0), std::invalid_argument);
}

TEST_CASE("parse tags") {
  CHECK(parse_estimator("mean")->tag() == mean_estimator()->tag());
  CHECK(parse_estimator("quantile:0.9")->estimate(std::vector<double>{1, 2, 3}) == 3);
  CHECK(parse_estimator("cvar:0.5:0")->estimate(std::vector<double>{-1, 1}) == 1);
  CHECK(parse_estimator("nhpp:0.5")->estimate(std::vector<double>{1, 1}) == 2);
  CHECK_NOTHROW(parse_estimator("ar1"));
  CHECK_THROWS_AS(parse_estimator("cvar"), std::invalid_argument);
  CHECK_THROWS_AS(parse_estimator("quantile:1.5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_estimator("median"), std::invalid_argument);
}

TEST_CASE("sliding and prefixes agree with direct estimation") {
  std::vector<double> x;
  for (int i = 0; i < 60; ++i) x.push_back(std::sin(0.7 * i) + 0.01 * i);
  for (const auto& e : {mean_estimator(), quantile_estimator(0.7), cvar_estimator(0.7),
                        cvar_estimator(0.6, CvarKnownQuantile{0.2}), ar1_estimator(),
                        nhpp_rate_estimator(0.5)}) {
    CAPTURE(e->tag());
    std::vector<double> data = x;
    if (e->tag().rfind("nhpp", 0) == 0) {
      for (auto& v : data) v = std::floor(std::abs(v) * 3);
    }
    const std::span<const double> s(data);
    const std::size_t m = 12, d = 5, b = (data.size() - m) / d + 1;
    std::vector<std::optional<double>> out(b - 1);
    e->sliding(s, m, d, 1, out);
    for (std::size_t k = 0; k < out.size(); ++k) {
      const auto direct = e->try_estimate(s.subspan((k + 1) * d, m));
      REQUIRE(out[k].has_value() == direct.has_value());
      if (direct) CHECK(*out[k] == doctest::Approx(*direct).epsilon(1e-12));
    }
    std::vector<std::optional<double>> pre(m);
    e->prefixes(s.subspan(7, m), pre);
    for (std::size_t j = 1; j <= m; ++j) {
      if (j < e->min_window()) {
        CHECK_FALSE(pre[j - 1].has_value());
        continue;
      }
      const auto direct = e->try_estimate(s.subspan(7, j));
      REQUIRE(pre[j - 1].has_value() == direct.has_value());
      if (direct) CHECK(*pre[j - 1] == doctest::Approx(*direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("short windows are rejected") {
  CHECK_THROWS_AS(ar1_estimator()->estimate(std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(mean_estimator()->estimate(std::vector<double>{}), std::invalid_argument);
}
