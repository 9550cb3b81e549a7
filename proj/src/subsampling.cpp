#include "obci/subsampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>

#include "obci/limits.hpp"

namespace obci {

SubsamplingDistribution subsample_distribution(const TimeSeriesData& data, std::size_t m,
                                               const FunctionalEstimator& est, Execution exec) {
  const std::size_t n = data.size();
  if (m < 2 || m >= n) throw std::invalid_argument("subsampling: need 2 <= m < n");
  if (m < est.min_window()) throw std::invalid_argument("subsampling: m below the minimum window");
  const auto full = est.try_estimate(data.values());
  if (!full) throw DegenerateEstimate("undefined estimate on the full series");

  const std::size_t count = n - m + 1;
  std::vector<std::optional<double>> raw(count);
  const std::size_t chunks = (count + kBatchChunk - 1) / kBatchChunk;
  const auto run = [&](std::size_t c) {
    const std::size_t first = c * kBatchChunk;
    const std::size_t len = std::min(kBatchChunk, count - first);
    est.sliding(data.values(), m, 1, first,
                std::span<std::optional<double>>(raw).subspan(first, len));
  };
  if (exec == Execution::serial) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
  } else {
    const auto nc = static_cast<std::int64_t>(chunks);
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < nc; ++c) {
      try {
        run(static_cast<std::size_t>(c));
      } catch (...) {
#pragma omp critical(obci_subsample_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  }

  SubsamplingDistribution out;
  out.m = m;
  out.tau_full = std::sqrt(static_cast<double>(n));
  out.tau_sub = std::sqrt(static_cast<double>(m));
  out.point_estimate = *full;
  out.values.reserve(count);
  for (const auto& v : raw) {
    if (v) {
      out.values.push_back(out.tau_sub * (*v - *full));
    } else {
      ++out.dropped;
    }
  }
  std::sort(out.values.begin(), out.values.end());
  return out;
}

IntervalResult subsampling_interval(const TimeSeriesData& data, const FunctionalEstimator& est,
                                    double alpha, Execution exec) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  const std::size_t n = data.size();
  if (n < 9) throw std::invalid_argument("subsampling: need n >= 9");
  const auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  const SubsamplingDistribution dist = subsample_distribution(data, m, est, exec);
  if (dist.values.size() < 10) throw DegenerateInterval("fewer than 10 valid subsamples");

  const double c_hi = empirical_quantile(dist.values, 1.0 - alpha / 2.0);
  const double c_lo = empirical_quantile(dist.values, alpha / 2.0);
  IntervalResult r;
  r.method = Procedure::ss;
  r.alpha = alpha;
  r.point_estimate = dist.point_estimate;
  r.lower = dist.point_estimate - c_hi / dist.tau_full;
  r.upper = dist.point_estimate - c_lo / dist.tau_full;
  r.center = 0.5 * (r.lower + r.upper);
  r.half_width = 0.5 * (r.upper - r.lower);
  r.sigma_hat = 1.0;
  r.critical_value_used = c_hi;
  r.diagnostics = {n, m, 1, n - m + 1, static_cast<double>(m) / static_cast<double>(n),
                   BatchCount::infinite(), true};
  return r;
}

}  // namespace obci
