#pragma once

#include <cstddef>
#include <vector>

#include "obci/cip.hpp"
#include "obci/common.hpp"
#include "obci/functionals.hpp"
#include "obci/series.hpp"

namespace obci {

// Sorted roots sqrt(m) (theta_{j,m} - theta_n) over the fully overlapping subsamples.
struct SubsamplingDistribution {
  std::vector<double> values;
  std::size_t m = 0;
  double tau_full = 0.0;
  double tau_sub = 0.0;
  double point_estimate = 0.0;
  // Subsamples with an undefined estimate, left out of `values`.
  std::size_t dropped = 0;
};

// Requires 2 <= m < n. Throws DegenerateEstimate if the full-series estimate is undefined.
SubsamplingDistribution subsample_distribution(const TimeSeriesData& data, std::size_t m,
                                               const FunctionalEstimator& est,
                                               Execution exec = Execution::parallel);

// Interval (theta_n - c_{1-alpha/2} / sqrt(n), theta_n - c_{alpha/2} / sqrt(n)) with
// m = round(sqrt(n)). center is the midpoint; point_estimate carries theta_n.
// Throws DegenerateInterval with fewer than 10 valid subsamples.
IntervalResult subsampling_interval(const TimeSeriesData& data, const FunctionalEstimator& est,
                                    double alpha, Execution exec = Execution::parallel);

}  // namespace obci
