#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "obci/common.hpp"
#include "obci/functionals.hpp"

namespace obci {

// Ordered finite observations, n >= 2.
class TimeSeriesData {
 public:
  explicit TimeSeriesData(std::vector<double> values);

  // One decimal value per line; blank lines and lines starting with '#' are skipped.
  // Throws ParseError naming the 1-based line.
  static TimeSeriesData parse(std::istream& in);
  static TimeSeriesData load(const std::string& path);

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

// Batch geometry. Batch i (0-based) covers observations [i d, i d + m).
struct BatchLayout {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t d = 0;
  std::size_t b = 0;

  std::size_t start(std::size_t i) const { return i * d; }
  // 1-based start indices (i - 1) d + 1.
  std::vector<std::size_t> starts() const;
  bool overlapping() const { return d < m; }
};

// b = floor((n - m) / d) + 1; throws std::invalid_argument unless
// 1 <= m <= n, d >= 1 and b >= 2.
BatchLayout make_layout(std::size_t n, std::size_t m, std::size_t d);
// m = round(beta_target n).
BatchLayout layout_from_fractions(std::size_t n, double beta_target, std::size_t d);

struct BatchEstimates {
  std::vector<double> per_batch;
  double sectioning = 0.0;
  double batching_mean = 0.0;
};

// Batches are processed in fixed-size chunks so serial and parallel results agree bit for bit.
inline constexpr std::size_t kBatchChunk = 512;

// Throws DegenerateEstimate naming the first undefined batch (1-based), or
// "full series" when the sectioning estimate is undefined.
BatchEstimates batch_estimates(const TimeSeriesData& data, const BatchLayout& layout,
                               const FunctionalEstimator& est,
                               Execution exec = Execution::parallel);

// Entry j - 1 is the estimate over the first j observations of batch i (0-based);
// nullopt below est.min_window() or where the estimate is undefined.
std::vector<std::optional<double>> prefix_estimates(const TimeSeriesData& data,
                                                    const BatchLayout& layout, std::size_t i,
                                                    const FunctionalEstimator& est);

}  // namespace obci
