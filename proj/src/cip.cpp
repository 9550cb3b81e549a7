#include "obci/cip.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace obci {

namespace {

double sum_sq_dev(const std::vector<double>& v, double center) {
  double acc = 0.0;
  for (double x : v) acc += (x - center) * (x - center);
  return acc;
}

double beta_hat(const BatchLayout& layout) {
  return static_cast<double>(layout.m) / static_cast<double>(layout.n);
}

}  // namespace

VarianceEstimate var_ob1(const BatchEstimates& est, const BatchLayout& layout) {
  const double k1 = kappa1(beta_hat(layout));
  const double scale = static_cast<double>(layout.m) / static_cast<double>(layout.b);
  return {scale * sum_sq_dev(est.per_batch, est.sectioning) / k1, Procedure::ob1, k1};
}

VarianceEstimate var_ob2(const BatchEstimates& est, const BatchLayout& layout, BatchCount b_inf) {
  const double k2 = kappa2(beta_hat(layout), b_inf);
  const double scale = static_cast<double>(layout.m) / static_cast<double>(layout.b);
  return {scale * sum_sq_dev(est.per_batch, est.batching_mean) / k2, Procedure::ob2, k2};
}

VarianceEstimate var_ob3(const TimeSeriesData& data, const BatchLayout& layout,
                         const FunctionalEstimator& est, const WeightFunction& weight,
                         Execution exec) {
  if (layout.n != data.size()) throw std::invalid_argument("layout does not match data length");
  const std::size_t m = layout.m;
  const double md = static_cast<double>(m);
  std::vector<double> fw(m);
  for (std::size_t j = 1; j <= m; ++j) fw[j - 1] = weight(static_cast<double>(j) / md);
  const double norm = 1.0 / (md * std::sqrt(md));

  std::vector<double> areas(layout.b);
  std::atomic<bool> degenerate{false};
  const auto area = [&](std::size_t i, std::vector<std::optional<double>>& prefix) {
    est.prefixes(data.values().subspan(layout.start(i), m), prefix);
    if (!prefix[m - 1]) {
      degenerate = true;
      return;
    }
    const double full = *prefix[m - 1];
    double acc = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
      if (prefix[j - 1]) acc += fw[j - 1] * static_cast<double>(j) * (*prefix[j - 1] - full);
    }
    const double a = acc * norm;
    areas[i] = a * a;
  };

  if (exec == Execution::serial) {
    std::vector<std::optional<double>> prefix(m);
    for (std::size_t i = 0; i < layout.b; ++i) area(i, prefix);
  } else {
    const auto nb = static_cast<std::int64_t>(layout.b);
    std::exception_ptr error;
#pragma omp parallel
    {
      std::vector<std::optional<double>> prefix(m);
#pragma omp for schedule(dynamic, 64)
      for (std::int64_t i = 0; i < nb; ++i) {
        try {
          area(static_cast<std::size_t>(i), prefix);
        } catch (...) {
#pragma omp critical(obci_area_error)
          if (!error) error = std::current_exception();
        }
      }
    }
    if (error) std::rethrow_exception(error);
  }
  if (degenerate) throw DegenerateEstimate("undefined full-batch estimate in the area estimator");
  const double value =
      std::accumulate(areas.begin(), areas.end(), 0.0) / static_cast<double>(layout.b);
  return {value, Procedure::ob3, 1.0};
}

BatchCount classify_b_inf(const BatchLayout& layout) {
  const double root_n = std::sqrt(static_cast<double>(layout.n));
  if (static_cast<double>(layout.d) <= root_n) return BatchCount::infinite();
  return BatchCount::finite(layout.b);
}

TableCriticalValues::TableCriticalValues(CriticalValueTable table, std::ostream* warn)
    : table_(std::move(table)), warn_(warn) {}

double TableCriticalValues::value(Procedure method, double beta, BatchCount b_inf, double q,
                                  const WeightFunction&) {
  const auto match = table_.lookup(method, beta, b_inf, q);
  if (!match) {
    throw std::runtime_error("critical-value table has no entry for " +
                             std::string(to_string(method)) + " b_inf=" + b_inf.str() +
                             " q=" + std::to_string(q));
  }
  if (match->beta_gap > 0.01 && warn_) {
    *warn_ << "warning: nearest tabulated beta " << match->entry->beta << " differs from " << beta
           << " by " << match->beta_gap << '\n';
  }
  return match->entry->value;
}

OnDemandCriticalValues::OnDemandCriticalValues(std::size_t replications, std::size_t grid,
                                               std::uint64_t seed, Execution exec)
    : replications_(replications), grid_(grid), seed_(seed), exec_(exec) {}

double OnDemandCriticalValues::value(Procedure method, double beta, BatchCount b_inf, double q,
                                     const WeightFunction& weight) {
  const std::size_t b_key = b_inf.is_infinite() ? 0 : b_inf.value();
  const std::string w_key = method == Procedure::ob3 ? weight.tag() : std::string();
  const Key key{static_cast<int>(method), beta, b_key, q, w_key};
  std::lock_guard<std::mutex> lock(mutex_);
  if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
  LimitConfig config;
  config.method = method;
  config.asym.beta = beta;
  config.asym.b_inf = b_inf;
  config.replications = replications_;
  config.grid = grid_;
  config.seed = seed_;
  config.weight = weight;
  const CriticalValue cv = critical_value(config, q, exec_);
  redraws_ += cv.redraws;
  const double t = round_significant6(cv.value);
  cache_.emplace(key, t);
  return t;
}

IntervalResult build_interval(const TimeSeriesData& data, const FunctionalEstimator& est,
                              const IntervalSpec& spec, CriticalValueSource& critical) {
  if (spec.method == Procedure::ss) {
    throw std::invalid_argument("build_interval: use subsampling_interval for ss");
  }
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1)");
  }
  const BatchLayout layout = make_layout(data.size(), spec.m, spec.d);
  const BatchEstimates be = batch_estimates(data, layout, est, spec.exec);
  const BatchCount b_inf = classify_b_inf(layout);

  IntervalResult r;
  r.method = spec.method;
  r.alpha = spec.alpha;
  r.diagnostics = {layout.n, layout.m, layout.d, layout.b, beta_hat(layout), b_inf, false};
  r.diagnostics.small_batch =
      spec.regime == BatchRegime::small ||
      (spec.regime == BatchRegime::automatic && layout.m * layout.m <= layout.n);

  VarianceEstimate var;
  switch (spec.method) {
    case Procedure::ob1: var = var_ob1(be, layout); break;
    case Procedure::ob2: var = var_ob2(be, layout, b_inf); break;
    default: var = var_ob3(data, layout, est, spec.weight, spec.exec); break;
  }
  r.center = spec.method == Procedure::ob2 ? be.batching_mean : be.sectioning;
  r.point_estimate = be.sectioning;
  r.sigma_hat = std::sqrt(var.value);
  if (!(r.sigma_hat > 0.0)) throw DegenerateInterval("variance estimate is zero");

  const double q = spec.sides == Sidedness::two_sided ? 1.0 - spec.alpha / 2.0 : 1.0 - spec.alpha;
  r.critical_value_used = r.diagnostics.small_batch
                              ? normal_quantile(q)
                              : critical.value(spec.method, r.diagnostics.beta, b_inf, q,
                                               spec.weight);
  r.half_width = r.critical_value_used * r.sigma_hat / std::sqrt(static_cast<double>(layout.n));
  const double inf = std::numeric_limits<double>::infinity();
  r.lower = spec.sides == Sidedness::upper_bound ? -inf : r.center - r.half_width;
  r.upper = spec.sides == Sidedness::lower_bound ? inf : r.center + r.half_width;
  return r;
}

std::string format_interval_line(const IntervalResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%zu,%s", r.lower,
                r.center, r.upper, r.half_width, r.sigma_hat, r.critical_value_used,
                r.diagnostics.beta, r.diagnostics.b, r.diagnostics.b_inf.str().c_str());
  return buf;
}

}  // namespace obci
