#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "obci/cip.hpp"
#include "obci/common.hpp"
#include "obci/functionals.hpp"
#include "obci/limits.hpp"
#include "obci/rng.hpp"
#include "obci/series.hpp"

namespace obci {

struct IidNormal {};

// X_t = c + phi X_{t-1} + eps_t, X_0 = 0, first burn_in values discarded.
struct Ar1Process {
  double phi = 0.5;
  double c = 0.0;
  double sigma_eps = 1.0;
  std::size_t burn_in = 1000;
};

// Poisson counts on [t, t + delta] for the rate a + b s.
struct NhppIncrements {
  double t = 0.25;
  double delta = 1e-4;
  double a = 4.0;
  double b = 8.0;
};

// Every observation equals `value`; used to exercise the NA path.
struct ConstantSeries {
  double value = 0.0;
};

using GeneratorKind = std::variant<IidNormal, Ar1Process, NhppIncrements, ConstantSeries>;

struct GeneratorSpec {
  GeneratorKind kind = IidNormal{};
  std::size_t n = 1000;
};

// Throws std::invalid_argument for |phi| >= 1, a nonpositive rate or n < 2.
TimeSeriesData generate(const GeneratorSpec& spec, SeedSpec seed);

// phi(Phi^{-1}(gamma)) / (1 - gamma): CVaR of a standard normal.
double normal_cvar(double gamma);

// beta == 0 selects the small-batch regime with m = floor(sqrt(n)).
struct MethodConfig {
  Procedure method = Procedure::ob1;
  double beta = 0.25;
  std::size_t d = 1;
  double alpha = 0.05;
  WeightFunction weight = WeightFunction::constant_sqrt12();
};

// Batch size implied by the method config for a series of length n.
std::size_t batch_size_for(const MethodConfig& method, std::size_t n);

struct CoverageConfig {
  std::string study = "custom";
  GeneratorSpec generator;
  EstimatorPtr estimator;
  double truth = 0.0;
  MethodConfig method;
  std::size_t replications = 10000;
  std::uint64_t seed = kDefaultSeed;
  // Limit draws behind on-demand critical values.
  std::size_t cv_replications = kDefaultLimitReplications;
  std::size_t cv_grid = kDefaultGridPerUnit;
};

struct CoverageReport {
  std::string study;
  std::size_t n = 0;
  Procedure method = Procedure::ob1;
  double beta = 0.0;
  std::size_t m = 0;
  std::size_t d = 0;
  std::size_t b = 0;
  BatchCount b_inf = BatchCount::infinite();
  double critical_value = 0.0;
  std::size_t replications = 0;
  std::size_t covered = 0;
  std::size_t missed = 0;
  std::size_t na_count = 0;
  double coverage = 0.0;
  double mean_half_width = 0.0;
  double mc_standard_error = 0.0;
  std::uint64_t seed = 0;

  static constexpr const char* kCsvHeader =
      "study,n,method,beta,d,coverage,half_width,mc_se,na_count,replications,seed";
  std::string csv_row() const;
};

// Replication r draws its series from stream (seed, r). Degenerate estimates
// and degenerate intervals count as NA and leave the coverage denominator.
// Throws DegenerateEstimate when every replication is NA. `critical`
// defaults to on-demand simulation with (cv_replications, cv_grid, seed).
CoverageReport coverage_experiment_serial(const CoverageConfig& config,
                                          CriticalValueSource* critical = nullptr);
CoverageReport coverage_experiment_parallel(const CoverageConfig& config,
                                            CriticalValueSource* critical = nullptr);
CoverageReport coverage_experiment(const CoverageConfig& config,
                                   Execution exec = Execution::parallel,
                                   CriticalValueSource* critical = nullptr);

std::vector<CoverageReport> offset_sweep(const CoverageConfig& base,
                                         const std::vector<std::size_t>& offsets,
                                         Execution exec = Execution::parallel,
                                         CriticalValueSource* critical = nullptr);

// Named table cells, e.g. "cvar-g0.7-n1000-ob1-b0.25".
struct CoveragePreset {
  std::string name;
  CoverageConfig config;
};
std::vector<CoveragePreset> coverage_presets();
std::optional<CoverageConfig> find_preset(const std::string& name);

}  // namespace obci
