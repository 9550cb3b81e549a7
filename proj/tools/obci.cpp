// obci: critical-value tables, single intervals and coverage experiments.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "obci/cip.hpp"
#include "obci/common.hpp"
#include "obci/experiments.hpp"
#include "obci/functionals.hpp"
#include "obci/limits.hpp"
#include "obci/series.hpp"
#include "obci/subsampling.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitDegenerateEstimate = 4;
constexpr int kExitDegenerateInterval = 5;

struct Globals {
  int threads = 0;
  std::uint64_t seed = obci::kDefaultSeed;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::optional<std::string> table_dir() {
  if (const char* dir = std::getenv("OBCI_TABLE_DIR"); dir && *dir) return std::string(dir);
  return std::nullopt;
}

std::string default_table_path() {
  const auto dir = table_dir();
  return dir ? (std::filesystem::path(*dir) / "critvals.csv").string() : std::string();
}

// ---- critvals --------------------------------------------------------------

struct CritvalsArgs {
  std::vector<std::string> methods{"ob1"};
  std::vector<double> betas;
  std::vector<std::string> b_infs{"inf"};
  std::vector<double> qs;
  std::size_t reps = obci::kDefaultLimitReplications;
  std::size_t grid = obci::kDefaultGridPerUnit;
  std::string weight = "constant-sqrt12";
  std::string out;
};

int run_critvals(const CritvalsArgs& a, const Globals& g) {
  if (a.qs.empty()) throw UsageError("critvals: at least one quantile is required");
  if (a.betas.empty()) throw UsageError("critvals: at least one beta is required");
  const std::string out_path = a.out.empty() ? default_table_path() : a.out;
  std::cerr << "# obci critvals methods=" << CLI::detail::join(a.methods)
            << " beta=" << CLI::detail::join(a.betas) << " b_inf=" << CLI::detail::join(a.b_infs)
            << " q=" << CLI::detail::join(a.qs) << " reps=" << a.reps << " grid=" << a.grid
            << " weight=" << a.weight << " seed=" << g.seed << " threads=" << obci::worker_count()
            << " out=" << (out_path.empty() ? "-" : out_path) << '\n';

  obci::CriticalValueTable table;
  const auto weight = obci::WeightFunction::from_tag(a.weight);
  for (const auto& m : a.methods) {
    const auto method = obci::parse_procedure(m);
    if (method == obci::Procedure::ss) throw UsageError("critvals: ss has no limit table");
    for (double beta : a.betas) {
      for (const auto& b_text : a.b_infs) {
        obci::LimitConfig config;
        config.method = method;
        config.asym.beta = beta;
        config.asym.b_inf = obci::BatchCount::parse(b_text);
        config.replications = a.reps;
        config.grid = a.grid;
        config.seed = g.seed;
        config.weight = weight;
        std::size_t redraws = 0;
        const auto values = obci::critical_values(config, a.qs, obci::Execution::parallel, &redraws);
        if (redraws > 0) {
          std::cerr << "# " << m << " beta=" << beta << " b_inf=" << b_text << ": " << redraws
                    << " zero-chi2 draws redrawn\n";
        }
        for (std::size_t k = 0; k < a.qs.size(); ++k) {
          table.add({method, beta, config.asym.b_inf, a.qs[k], obci::round_significant6(values[k]),
                     a.reps, a.grid, g.seed});
        }
      }
    }
  }
  if (out_path.empty()) {
    table.write_csv(std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    table.write_csv(out);
    if (!out) throw std::runtime_error("write failed for '" + out_path + "'");
  }
  return kExitOk;
}

// ---- ci --------------------------------------------------------------------

struct CiArgs {
  std::string method = "ob1";
  std::size_t m = 0;
  std::size_t d = 1;
  double alpha = 0.05;
  std::string estimator = "mean";
  std::string data;
  std::string table;
  std::string weight = "constant-sqrt12";
  std::string regime = "auto";
  std::string sides = "two";
  std::size_t reps = obci::kDefaultLimitReplications;
  std::size_t grid = obci::kDefaultGridPerUnit;
};

int run_ci(const CiArgs& a, const Globals& g) {
  const auto method = obci::parse_procedure(a.method);
  const auto est = obci::parse_estimator(a.estimator);
  std::string table_path = a.table;
  if (table_path.empty() && method != obci::Procedure::ss) {
    const auto fallback = default_table_path();
    if (!fallback.empty() && std::filesystem::exists(fallback)) table_path = fallback;
  }
  std::cerr << "# obci ci method=" << obci::to_string(method) << " m=" << a.m << " d=" << a.d
            << " alpha=" << a.alpha << " estimator=" << est->tag() << " data=" << a.data
            << " weight=" << a.weight << " regime=" << a.regime << " sides=" << a.sides
            << " critical=" << (table_path.empty() ? "on-demand" : table_path)
            << " reps=" << a.reps << " grid=" << a.grid << " seed=" << g.seed
            << " threads=" << obci::worker_count() << '\n';

  const auto data = obci::TimeSeriesData::load(a.data);
  obci::IntervalResult r;
  if (method == obci::Procedure::ss) {
    r = obci::subsampling_interval(data, *est, a.alpha);
  } else {
    if (a.m == 0) throw UsageError("ci: --m is required for ob1, ob2 and ob3");
    obci::IntervalSpec spec;
    spec.method = method;
    spec.m = a.m;
    spec.d = a.d;
    spec.alpha = a.alpha;
    spec.weight = obci::WeightFunction::from_tag(a.weight);
    spec.regime = a.regime == "small"   ? obci::BatchRegime::small
                  : a.regime == "large" ? obci::BatchRegime::large
                                        : obci::BatchRegime::automatic;
    spec.sides = a.sides == "lower"   ? obci::Sidedness::lower_bound
                 : a.sides == "upper" ? obci::Sidedness::upper_bound
                                      : obci::Sidedness::two_sided;
    std::unique_ptr<obci::CriticalValueSource> source;
    if (table_path.empty()) {
      source = std::make_unique<obci::OnDemandCriticalValues>(a.reps, a.grid, g.seed);
    } else {
      source = std::make_unique<obci::TableCriticalValues>(
          obci::CriticalValueTable::load(table_path), &std::cerr);
    }
    r = obci::build_interval(data, *est, spec, *source);
  }
  std::cout << obci::format_interval_line(r) << '\n';
  return kExitOk;
}

// ---- coverage --------------------------------------------------------------

struct CoverageArgs {
  std::string study;
  std::string preset;
  bool list_presets = false;
  double gamma = 0.7;
  double phi = 0.5;
  double delta = 1e-4;
  std::size_t n = 1000;
  std::string method = "ob1";
  double beta = 0.25;
  std::vector<std::size_t> offsets{1};
  double alpha = 0.05;
  std::size_t reps = 10000;
  std::size_t cv_reps = obci::kDefaultLimitReplications;
  std::size_t grid = obci::kDefaultGridPerUnit;
};

obci::CoverageConfig explicit_coverage(const CoverageArgs& a) {
  obci::CoverageConfig c;
  c.study = a.study;
  c.generator.n = a.n;
  if (a.study == "cvar" || a.study == "offset") {
    c.generator.kind = obci::IidNormal{};
    c.estimator = obci::cvar_estimator(a.gamma);
    c.truth = obci::normal_cvar(a.gamma);
  } else if (a.study == "ar1") {
    c.generator.kind = obci::Ar1Process{a.phi};
    c.estimator = obci::ar1_estimator();
    c.truth = a.phi;
  } else if (a.study == "nhpp") {
    obci::NhppIncrements rate;
    rate.delta = a.delta;
    c.generator.kind = rate;
    c.estimator = obci::nhpp_rate_estimator(a.delta);
    c.truth = rate.a + rate.b * rate.t;
  } else {
    throw UsageError("coverage: unknown study '" + a.study + "' (cvar, ar1, nhpp, offset)");
  }
  c.method.method = obci::parse_procedure(a.method);
  c.method.beta = a.beta;
  c.method.alpha = a.alpha;
  return c;
}

int run_coverage(const CoverageArgs& a, const Globals& g) {
  if (a.list_presets) {
    for (const auto& p : obci::coverage_presets()) std::cout << p.name << '\n';
    return kExitOk;
  }
  obci::CoverageConfig config;
  std::vector<std::size_t> offsets = a.offsets;
  if (!a.preset.empty()) {
    auto found = obci::find_preset(a.preset);
    if (!found) throw UsageError("coverage: unknown preset '" + a.preset + "'");
    config = *found;
    offsets = {config.method.d};
  } else {
    if (a.study.empty()) throw UsageError("coverage: --study or --preset is required");
    config = explicit_coverage(a);
  }
  config.replications = a.reps;
  config.seed = g.seed;
  config.cv_replications = a.cv_reps;
  config.cv_grid = a.grid;
  std::cerr << "# obci coverage study=" << config.study << " preset=" << (a.preset.empty() ? "-" : a.preset)
            << " n=" << config.generator.n << " estimator=" << config.estimator->tag()
            << " truth=" << config.truth << " method=" << obci::to_string(config.method.method)
            << " beta=" << config.method.beta << " d=" << CLI::detail::join(offsets)
            << " alpha=" << config.method.alpha << " reps=" << config.replications
            << " cv_reps=" << config.cv_replications << " grid=" << config.cv_grid
            << " seed=" << config.seed << " threads=" << obci::worker_count() << '\n';

  const auto reports = obci::offset_sweep(config, offsets);
  std::cout << obci::CoverageReport::kCsvHeader << '\n';
  for (const auto& r : reports) {
    std::cerr << "# " << obci::to_string(r.method) << " m=" << r.m << " d=" << r.d << " b=" << r.b
              << " b_inf=" << r.b_inf.str() << " t=" << r.critical_value
              << " covered=" << r.covered << " missed=" << r.missed << " na=" << r.na_count << '\n';
    std::cout << r.csv_row() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overlapping-batch confidence intervals"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", g.seed, "master seed");

  CritvalsArgs cv;
  auto* critvals = app.add_subcommand("critvals", "tabulate limit critical values");
  critvals->add_option("--method", cv.methods, "ob1, ob2, ob3")->delimiter(',');
  critvals->add_option("--beta", cv.betas, "batch fractions")->delimiter(',')->required();
  critvals->add_option("--b-inf", cv.b_infs, "limiting batch counts or inf")->delimiter(',');
  critvals->add_option("--q", cv.qs, "quantile levels")->delimiter(',')->required();
  critvals->add_option("--reps", cv.reps, "limit replications");
  critvals->add_option("--grid", cv.grid, "grid points per unit time");
  critvals->add_option("--weight", cv.weight, "OB-III weight function");
  critvals->add_option("--out", cv.out, "output CSV (default $OBCI_TABLE_DIR/critvals.csv or stdout)");

  CiArgs ci;
  auto* ci_cmd = app.add_subcommand("ci", "confidence interval for one dataset");
  ci_cmd->add_option("--method", ci.method, "ob1, ob2, ob3 or ss")->required();
  ci_cmd->add_option("--m", ci.m, "batch size");
  ci_cmd->add_option("--d", ci.d, "batch offset");
  ci_cmd->add_option("--alpha", ci.alpha, "nominal miss probability");
  ci_cmd->add_option("--estimator", ci.estimator, "mean, quantile:G, cvar:G[:Q], ar1, nhpp:D");
  ci_cmd->add_option("--data", ci.data, "one observation per line")->required();
  ci_cmd->add_option("--table", ci.table, "critical-value CSV");
  ci_cmd->add_option("--weight", ci.weight, "OB-III weight function");
  ci_cmd->add_option("--regime", ci.regime, "auto, small or large")
      ->check(CLI::IsMember({"auto", "small", "large"}));
  ci_cmd->add_option("--sides", ci.sides, "two, lower or upper")
      ->check(CLI::IsMember({"two", "lower", "upper"}));
  ci_cmd->add_option("--reps", ci.reps, "limit replications for on-demand critical values");
  ci_cmd->add_option("--grid", ci.grid, "grid points per unit time for on-demand critical values");

  CoverageArgs co;
  auto* cov = app.add_subcommand("coverage", "coverage experiment");
  cov->add_option("--study", co.study, "cvar, ar1, nhpp or offset");
  cov->add_option("--preset", co.preset, "named table cell");
  cov->add_flag("--list-presets", co.list_presets, "print preset names");
  cov->add_option("--gamma", co.gamma, "CVaR level");
  cov->add_option("--phi", co.phi, "AR(1) coefficient");
  cov->add_option("--delta", co.delta, "NHPP increment length");
  cov->add_option("--n", co.n, "series length");
  cov->add_option("--method", co.method, "ob1, ob2, ob3 or ss");
  cov->add_option("--beta", co.beta, "batch fraction (0 = m = floor(sqrt(n)))");
  cov->add_option("--d", co.offsets, "batch offsets")->delimiter(',');
  cov->add_option("--alpha", co.alpha, "nominal miss probability");
  cov->add_option("--reps", co.reps, "replications");
  cov->add_option("--cv-reps", co.cv_reps, "limit replications for critical values");
  cov->add_option("--grid", co.grid, "grid points per unit time for critical values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  obci::set_worker_count(g.threads);
  try {
    if (*critvals) return run_critvals(cv, g);
    if (*ci_cmd) return run_ci(ci, g);
    return run_coverage(co, g);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const obci::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const obci::DegenerateEstimate& e) {
    std::cerr << "degenerate estimate (NA): " << e.what() << '\n';
    return kExitDegenerateEstimate;
  } catch (const obci::DegenerateInterval& e) {
    std::cerr << "degenerate interval: " << e.what() << '\n';
    return kExitDegenerateInterval;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
