#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace obci {

// Maps an ordered window of observations to a real estimate.
//
// estimate() throws std::invalid_argument for windows shorter than
// min_window() and DegenerateEstimate when the estimate is undefined.
class FunctionalEstimator {
 public:
  virtual ~FunctionalEstimator() = default;

  virtual double estimate(std::span<const double> window) const = 0;
  virtual std::size_t min_window() const = 0;
  virtual std::string tag() const = 0;

  // estimate(), with DegenerateEstimate mapped to nullopt.
  std::optional<double> try_estimate(std::span<const double> window) const;

  // out[k] = estimate on data[(first + k) d, (first + k) d + m), nullopt when degenerate.
  // The default re-estimates every window.
  virtual void sliding(std::span<const double> data, std::size_t m, std::size_t d,
                       std::size_t first, std::span<std::optional<double>> out) const;

  // out[j - 1] = estimate on window[0, j); nullopt below min_window or when degenerate.
  // The default re-estimates every prefix.
  virtual void prefixes(std::span<const double> window,
                        std::span<std::optional<double>> out) const;
};

using EstimatorPtr = std::shared_ptr<const FunctionalEstimator>;

EstimatorPtr mean_estimator();
// min{x : F_w(x) >= gamma}: the ceil(gamma w)-th order statistic.
EstimatorPtr quantile_estimator(double gamma);

struct CvarKnownQuantile {
  double q = 0.0;
};
// (1 / (w (1 - gamma))) sum Z 1{Z >= q}; q is the window's gamma-quantile
// unless a known value is supplied.
EstimatorPtr cvar_estimator(double gamma, std::optional<CvarKnownQuantile> known = std::nullopt);
// Least squares AR(1) coefficient without intercept.
EstimatorPtr ar1_estimator();
// Window mean of increment counts divided by delta.
EstimatorPtr nhpp_rate_estimator(double delta);

// "mean", "quantile:G", "cvar:G[:Q]", "ar1", "nhpp:D". Throws std::invalid_argument.
EstimatorPtr parse_estimator(std::string_view tag);

// 1-based rank ceil(gamma w), guarded against gamma w landing a hair above an integer.
std::size_t quantile_rank(double gamma, std::size_t w);

}  // namespace obci
