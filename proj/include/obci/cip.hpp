#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "obci/common.hpp"
#include "obci/functionals.hpp"
#include "obci/limits.hpp"
#include "obci/paths.hpp"
#include "obci/series.hpp"

namespace obci {

struct VarianceEstimate {
  double value = 0.0;
  Procedure method = Procedure::ob1;
  double kappa_used = 1.0;
};

// kappa1 at m / n.
VarianceEstimate var_ob1(const BatchEstimates& est, const BatchLayout& layout);
// kappa2 at m / n and the given b_inf.
VarianceEstimate var_ob2(const BatchEstimates& est, const BatchLayout& layout, BatchCount b_inf);
// Weighted area estimator; prefixes below est.min_window() contribute 0.
VarianceEstimate var_ob3(const TimeSeriesData& data, const BatchLayout& layout,
                         const FunctionalEstimator& est, const WeightFunction& weight,
                         Execution exec = Execution::parallel);

// Infinite when d <= sqrt(n), otherwise finite b.
BatchCount classify_b_inf(const BatchLayout& layout);

// Supplies t_{method, q}(beta, b_inf).
class CriticalValueSource {
 public:
  virtual ~CriticalValueSource() = default;
  virtual double value(Procedure method, double beta, BatchCount b_inf, double q,
                       const WeightFunction& weight) = 0;
};

class FixedCriticalValue final : public CriticalValueSource {
 public:
  explicit FixedCriticalValue(double t) : t_(t) {}
  double value(Procedure, double, BatchCount, double, const WeightFunction&) override { return t_; }

 private:
  double t_;
};

// Nearest tabulated beta; warns on `warn` when the gap exceeds 0.01.
class TableCriticalValues final : public CriticalValueSource {
 public:
  TableCriticalValues(CriticalValueTable table, std::ostream* warn);
  double value(Procedure method, double beta, BatchCount b_inf, double q,
               const WeightFunction& weight) override;

 private:
  CriticalValueTable table_;
  std::ostream* warn_;
};

// Simulates on first use and caches; values are rounded to 6 significant
// digits so they match a written and reloaded table.
class OnDemandCriticalValues final : public CriticalValueSource {
 public:
  OnDemandCriticalValues(std::size_t replications, std::size_t grid, std::uint64_t seed,
                         Execution exec = Execution::parallel);
  double value(Procedure method, double beta, BatchCount b_inf, double q,
               const WeightFunction& weight) override;
  std::size_t redraws() const { return redraws_; }

 private:
  using Key = std::tuple<int, double, std::size_t, double, std::string>;
  std::size_t replications_;
  std::size_t grid_;
  std::uint64_t seed_;
  Execution exec_;
  std::map<Key, double> cache_;
  std::size_t redraws_ = 0;
  std::mutex mutex_;
};

enum class Sidedness { two_sided, lower_bound, upper_bound };

// small: m ~ sqrt(n), normal critical value; large: simulated limit.
// automatic picks small when m * m <= n.
enum class BatchRegime { automatic, small, large };

struct IntervalSpec {
  Procedure method = Procedure::ob1;
  std::size_t m = 0;
  std::size_t d = 1;
  double alpha = 0.05;
  WeightFunction weight = WeightFunction::constant_sqrt12();
  Sidedness sides = Sidedness::two_sided;
  BatchRegime regime = BatchRegime::automatic;
  Execution exec = Execution::parallel;
};

struct IntervalDiagnostics {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t d = 0;
  std::size_t b = 0;
  double beta = 0.0;
  BatchCount b_inf = BatchCount::infinite();
  bool small_batch = false;
};

struct IntervalResult {
  Procedure method = Procedure::ob1;
  double center = 0.0;
  double sigma_hat = 0.0;
  double half_width = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.05;
  double critical_value_used = 0.0;
  // Sectioning estimate. OB-II centers on the batching mean and subsampling on a midpoint.
  double point_estimate = 0.0;
  IntervalDiagnostics diagnostics;

  bool covers(double truth) const { return lower <= truth && truth <= upper; }
};

// One-sided intervals put +-infinity on the open side.
// Throws DegenerateEstimate when any batch or the full-series estimate is
// undefined and DegenerateInterval when sigma_hat == 0.
IntervalResult build_interval(const TimeSeriesData& data, const FunctionalEstimator& est,
                              const IntervalSpec& spec, CriticalValueSource& critical);

// lower,center,upper,half_width,sigma_hat,critical_value,beta,b,b_inf_class
std::string format_interval_line(const IntervalResult& r);

}  // namespace obci
