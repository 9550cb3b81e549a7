#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "obci/common.hpp"
#include "obci/paths.hpp"
#include "obci/rng.hpp"

namespace obci {

inline constexpr std::uint64_t kDefaultSeed = 20240917;
inline constexpr std::size_t kDefaultLimitReplications = 200000;

// Asymptotic number of batches: an integer >= 2 or infinity.
class BatchCount {
 public:
  static BatchCount infinite() { return BatchCount(); }
  static BatchCount finite(std::size_t b);
  // "inf" or an integer >= 2.
  static BatchCount parse(std::string_view text);

  bool is_infinite() const { return b_ == 0; }
  // Throws std::logic_error when infinite.
  std::size_t value() const;
  std::string str() const;

  friend bool operator==(const BatchCount&, const BatchCount&) = default;

 private:
  BatchCount() = default;
  std::size_t b_ = 0;
};

// Limiting batch geometry (beta = lim m/n, b_inf = lim b). eta = lim b/n is
// only consulted by the OB-I moment formula.
struct BatchAsymptotics {
  double beta = 0.0;
  BatchCount b_inf = BatchCount::infinite();
  double eta = 0.0;

  // Throws std::invalid_argument unless 0 <= beta < 1 and eta >= 0.
  void validate() const;
  // (1 - beta) / eta, or +infinity when eta == 0.
  double d_lim() const;
};

double kappa1(double beta);
double kappa2(const BatchAsymptotics& asym);
double kappa2(double beta, BatchCount b_inf);

// One joint draw of the Studentized-root limit: T = numerator / sqrt(chi2).
struct LimitSample {
  double numerator = 0.0;
  double chi2 = 0.0;
  double t() const;
};

// Each sampler reads numerator and chi2 from the same path. OB-I and OB-II
// expect a path on [0, 1]; OB-III expects a path on [0, 1/beta] whose grid has
// an integral number of cells per unit time. The batch fraction used is the
// grid-aligned value round(beta * cells_per_unit) / cells_per_unit.
LimitSample sample_obi_limit(const BatchAsymptotics& asym, const WienerPath& path);
LimitSample sample_obii_limit(const BatchAsymptotics& asym, const WienerPath& path);
LimitSample sample_obiii_limit(const BatchAsymptotics& asym, const WeightFunction& weight,
                               const WienerPath& path);

// Simulates the path the method needs (horizon 1, or 1/beta for OB-III) and samples it.
LimitSample sample_limit(Procedure method, const BatchAsymptotics& asym,
                         const WeightFunction& weight, SeedSpec seed,
                         std::size_t grid_per_unit = kDefaultGridPerUnit);

// Settings for a batch of i.i.d. limit draws.
struct LimitConfig {
  Procedure method = Procedure::ob1;
  BatchAsymptotics asym;
  std::size_t replications = kDefaultLimitReplications;
  std::size_t grid = kDefaultGridPerUnit;
  std::uint64_t seed = kDefaultSeed;
  WeightFunction weight = WeightFunction::constant_sqrt12();
};

struct LimitDraws {
  std::vector<LimitSample> samples;
  // Draws with chi2 == 0 that were rejected and resampled.
  std::size_t redraws = 0;
};

// Replication r uses stream (seed, r); both variants return identical draws.
LimitDraws draw_limits_serial(const LimitConfig& config);
LimitDraws draw_limits_parallel(const LimitConfig& config);
LimitDraws draw_limits(const LimitConfig& config, Execution exec = Execution::parallel);

// inf{x : F_R(x) >= q} for the empirical cdf of `sorted` (ascending).
double empirical_quantile(std::span<const double> sorted, double q);

struct CriticalValue {
  double value = 0.0;
  std::size_t redraws = 0;
};

// q-quantile of T_method(beta, b_inf). beta == 0 dispatches to the standard
// normal quantile; otherwise requires replications >= 1e4.
CriticalValue critical_value(const LimitConfig& config, double q,
                             Execution exec = Execution::parallel);
// Several quantiles from one set of draws.
std::vector<double> critical_values(const LimitConfig& config, std::span<const double> qs,
                                    Execution exec = Execution::parallel,
                                    std::size_t* redraws = nullptr);

// Rounds to the 6 significant digits used by the table format.
double round_significant6(double value);

struct CriticalValueEntry {
  Procedure method = Procedure::ob1;
  double beta = 0.0;
  BatchCount b_inf = BatchCount::infinite();
  double q = 0.0;
  double value = 0.0;
  std::size_t replications = 0;
  std::size_t grid = 0;
  std::uint64_t seed = 0;
};

// CSV: method,beta,b_inf,q,value,replications,grid,seed
class CriticalValueTable {
 public:
  static constexpr std::string_view kHeader = "method,beta,b_inf,q,value,replications,grid,seed";

  void add(CriticalValueEntry entry) { entries_.push_back(entry); }
  const std::vector<CriticalValueEntry>& entries() const { return entries_; }

  void write_csv(std::ostream& out) const;
  static CriticalValueTable read_csv(std::istream& in);
  static CriticalValueTable load(const std::string& path);

  struct Match {
    const CriticalValueEntry* entry = nullptr;
    double beta_gap = 0.0;
  };
  // Nearest-beta entry with the same method, b_inf and q (|q - q'| < 1e-9).
  std::optional<Match> lookup(Procedure method, double beta, BatchCount b_inf, double q) const;

 private:
  std::vector<CriticalValueEntry> entries_;
};

// Reference limiting variance of the OB-I variance estimator, with the
// convention infinity * 0 = 0 for d * mu1.
double obi_asymptotic_variance(const BatchAsymptotics& asym, double sigma);

// sigma^4 beta^4 (4/beta^3 - 11/beta^2 + 4/beta + 6) / (3 (1-beta)^4): the
// fully-overlapping (d = 1, b_inf = inf) variance of the OB-I estimator.
double obi_variance_fully_overlapping(double beta, double sigma);

}  // namespace obci
