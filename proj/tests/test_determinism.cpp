#include <doctest.h>

#include <cstring>
#include <vector>

#include "obci/cip.hpp"
#include "obci/experiments.hpp"
#include "obci/limits.hpp"
#include "obci/subsampling.hpp"

using namespace obci;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_draws(const LimitDraws& a, const LimitDraws& b) {
  if (a.samples.size() != b.samples.size() || a.redraws != b.redraws) return false;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    if (!same_bits(a.samples[i].numerator, b.samples[i].numerator)) return false;
    if (!same_bits(a.samples[i].chi2, b.samples[i].chi2)) return false;
  }
  return true;
}

bool same_report(const CoverageReport& a, const CoverageReport& b) {
  return a.csv_row() == b.csv_row() && a.covered == b.covered && a.na_count == b.na_count &&
         same_bits(a.mean_half_width, b.mean_half_width) &&
         same_bits(a.critical_value, b.critical_value);
}

}  // namespace

TEST_CASE("limit draws: serial equals parallel at every worker count") {
  for (Procedure p : {Procedure::ob1, Procedure::ob2, Procedure::ob3}) {
    for (BatchCount b : {BatchCount::infinite(), BatchCount::finite(5)}) {
      LimitConfig c;
      c.method = p;
      c.asym = {0.25, b, 0.0};
      c.replications = 300;
      c.grid = 128;
      const auto ref = draw_limits_serial(c);
      for (int w : {1, 4, 16}) {
        set_worker_count(w);
        CHECK(same_draws(ref, draw_limits_parallel(c)));
      }
    }
  }
  set_worker_count(1);
}

TEST_CASE("batch estimates and area estimator") {
  const auto data = generate({Ar1Process{0.7}, 5000}, {9, 0});
  const auto layout = make_layout(5000, 1250, 1);
  for (const auto& est : {mean_estimator(), cvar_estimator(0.8), ar1_estimator()}) {
    const auto ref = batch_estimates(data, layout, *est, Execution::serial);
    const auto v_ref =
        var_ob3(data, make_layout(5000, 100, 7), *est, WeightFunction::quadratic(), Execution::serial);
    for (int w : {1, 4, 16}) {
      set_worker_count(w);
      const auto par = batch_estimates(data, layout, *est, Execution::parallel);
      CHECK(par.per_batch == ref.per_batch);
      CHECK(same_bits(par.sectioning, ref.sectioning));
      CHECK(same_bits(par.batching_mean, ref.batching_mean));
      const auto v = var_ob3(data, make_layout(5000, 100, 7), *est, WeightFunction::quadratic(),
                             Execution::parallel);
      CHECK(same_bits(v.value, v_ref.value));
    }
  }
  set_worker_count(1);
}

TEST_CASE("coverage reports") {
  for (Procedure p : {Procedure::ob1, Procedure::ob3, Procedure::ss}) {
    CoverageConfig c;
    c.generator = {IidNormal{}, 500};
    c.estimator = cvar_estimator(0.7);
    c.truth = normal_cvar(0.7);
    c.method.method = p;
    c.replications = 64;
    c.cv_replications = 10000;
    c.cv_grid = 128;
    const auto ref = coverage_experiment_serial(c);
    for (int w : {1, 4, 16}) {
      set_worker_count(w);
      CHECK(same_report(ref, coverage_experiment_parallel(c)));
    }
  }
  set_worker_count(1);
}

TEST_CASE("interval and critical values independent of execution mode") {
  const auto data = generate({IidNormal{}, 2000}, {4, 0});
  OnDemandCriticalValues serial(10000, 128, 5, Execution::serial);
  OnDemandCriticalValues parallel(10000, 128, 5, Execution::parallel);
  IntervalSpec spec;
  spec.method = Procedure::ob2;
  spec.m = 500;
  spec.d = 3;
  spec.exec = Execution::serial;
  const auto a = build_interval(data, *quantile_estimator(0.9), spec, serial);
  set_worker_count(4);
  spec.exec = Execution::parallel;
  const auto b = build_interval(data, *quantile_estimator(0.9), spec, parallel);
  CHECK(format_interval_line(a) == format_interval_line(b));
  set_worker_count(1);
}
