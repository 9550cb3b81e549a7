#include "obci/experiments.hpp"

#include <cmath>
#include <cstdint>
#include <exception>
#include <cstdio>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "obci/subsampling.hpp"

namespace obci {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

TimeSeriesData generate(const GeneratorSpec& spec, SeedSpec seed) {
  if (spec.n < 2) throw std::invalid_argument("generate: n must be >= 2");
  Philox4x32 engine(seed);
  std::vector<double> x(spec.n);
  std::visit(
      Overloaded{
          [&](const IidNormal&) {
            boost::random::normal_distribution<double> normal;
            for (auto& v : x) v = normal(engine);
          },
          [&](const Ar1Process& p) {
            if (!(std::abs(p.phi) < 1.0)) throw std::invalid_argument("ar1: need |phi| < 1");
            if (!(p.sigma_eps > 0.0)) throw std::invalid_argument("ar1: sigma_eps must be positive");
            boost::random::normal_distribution<double> eps(0.0, p.sigma_eps);
            double prev = 0.0;
            for (std::size_t k = 0; k < p.burn_in; ++k) prev = p.c + p.phi * prev + eps(engine);
            for (auto& v : x) {
              prev = p.c + p.phi * prev + eps(engine);
              v = prev;
            }
          },
          [&](const NhppIncrements& p) {
            if (!(p.delta > 0.0)) throw std::invalid_argument("nhpp: delta must be positive");
            if (!(p.a + p.b * p.t > 0.0 && p.a + p.b * (p.t + p.delta) > 0.0)) {
              throw std::invalid_argument("nhpp: rate must be positive on [t, t + delta]");
            }
            const double mean = p.delta * (p.a + p.b * p.t) + 0.5 * p.b * p.delta * p.delta;
            boost::random::poisson_distribution<long, double> poisson(mean);
            for (auto& v : x) v = static_cast<double>(poisson(engine));
          },
          [&](const ConstantSeries& p) {
            for (auto& v : x) v = p.value;
          },
      },
      spec.kind);
  return TimeSeriesData(std::move(x));
}

double normal_cvar(double gamma) {
  const boost::math::normal_distribution<double> z;
  return boost::math::pdf(z, boost::math::quantile(z, gamma)) / (1.0 - gamma);
}

std::size_t batch_size_for(const MethodConfig& method, std::size_t n) {
  if (method.method == Procedure::ss) {
    return static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  }
  if (method.beta == 0.0) {
    return static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  }
  return static_cast<std::size_t>(std::llround(method.beta * static_cast<double>(n)));
}

std::string CoverageReport::csv_row() const {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%zu,%s,%.6g,%zu,%.6f,%.6g,%.6f,%zu,%zu,%llu", study.c_str(),
                n, std::string(to_string(method)).c_str(), beta, d, coverage, mean_half_width,
                mc_standard_error, na_count, replications,
                static_cast<unsigned long long>(seed));
  return buf;
}

namespace {

enum class Outcome : unsigned char { covered, missed, na };

struct Replicate {
  Outcome outcome = Outcome::na;
  double half_width = 0.0;
};

// Fixes the layout and critical value once; each replication only builds its interval.
class CoverageRunner {
 public:
  CoverageRunner(const CoverageConfig& config, CriticalValueSource* critical)
      : config_(config) {
    if (!config.estimator) throw std::invalid_argument("coverage: estimator not set");
    if (config.replications == 0) throw std::invalid_argument("coverage: replications must be >= 1");
    const std::size_t n = config.generator.n;
    report_.study = config.study;
    report_.n = n;
    report_.method = config.method.method;
    report_.beta = config.method.beta;
    report_.replications = config.replications;
    report_.seed = config.seed;
    report_.m = batch_size_for(config.method, n);
    if (config.method.method == Procedure::ss) {
      report_.d = 1;
      report_.b = n - report_.m + 1;
      return;
    }
    spec_.method = config.method.method;
    spec_.m = report_.m;
    spec_.d = config.method.d;
    spec_.alpha = config.method.alpha;
    spec_.weight = config.method.weight;
    spec_.regime = config.method.beta == 0.0 ? BatchRegime::small : BatchRegime::large;
    spec_.exec = Execution::serial;
    const BatchLayout layout = make_layout(n, spec_.m, spec_.d);
    report_.d = layout.d;
    report_.b = layout.b;
    report_.b_inf = classify_b_inf(layout);
    const double q = 1.0 - spec_.alpha / 2.0;
    if (spec_.regime == BatchRegime::small) {
      fixed_ = normal_quantile(q);
    } else {
      OnDemandCriticalValues fallback(config.cv_replications, config.cv_grid, config.seed);
      CriticalValueSource& source = critical ? *critical : fallback;
      fixed_ = source.value(spec_.method, static_cast<double>(layout.m) / static_cast<double>(n),
                            report_.b_inf, q, spec_.weight);
    }
    report_.critical_value = fixed_;
  }

  Replicate run(std::uint64_t r) const {
    const TimeSeriesData data = generate(config_.generator, SeedSpec{config_.seed, r});
    Replicate out;
    try {
      IntervalResult iv;
      if (config_.method.method == Procedure::ss) {
        iv = subsampling_interval(data, *config_.estimator, config_.method.alpha,
                                  Execution::serial);
      } else {
        FixedCriticalValue t(fixed_);
        iv = build_interval(data, *config_.estimator, spec_, t);
      }
      out.outcome = iv.covers(config_.truth) ? Outcome::covered : Outcome::missed;
      out.half_width = iv.half_width;
    } catch (const DegenerateEstimate&) {
      out.outcome = Outcome::na;
    } catch (const DegenerateInterval&) {
      out.outcome = Outcome::na;
    }
    return out;
  }

  CoverageReport finish(const std::vector<Replicate>& reps) const {
    CoverageReport rep = report_;
    double hw = 0.0;
    for (const auto& r : reps) {
      switch (r.outcome) {
        case Outcome::covered: ++rep.covered; hw += r.half_width; break;
        case Outcome::missed: ++rep.missed; hw += r.half_width; break;
        case Outcome::na: ++rep.na_count; break;
      }
    }
    const std::size_t valid = rep.covered + rep.missed;
    if (valid == 0) throw DegenerateEstimate("coverage: every replication was NA");
    const double v = static_cast<double>(valid);
    rep.coverage = static_cast<double>(rep.covered) / v;
    rep.mean_half_width = hw / v;
    rep.mc_standard_error = std::sqrt(rep.coverage * (1.0 - rep.coverage) / v);
    return rep;
  }

 private:
  const CoverageConfig& config_;
  CoverageReport report_;
  IntervalSpec spec_;
  double fixed_ = 0.0;
};

}  // namespace

CoverageReport coverage_experiment_serial(const CoverageConfig& config,
                                          CriticalValueSource* critical) {
  const CoverageRunner runner(config, critical);
  std::vector<Replicate> reps(config.replications);
  for (std::size_t r = 0; r < reps.size(); ++r) reps[r] = runner.run(r);
  return runner.finish(reps);
}

CoverageReport coverage_experiment_parallel(const CoverageConfig& config,
                                            CriticalValueSource* critical) {
  const CoverageRunner runner(config, critical);
  std::vector<Replicate> reps(config.replications);
  const auto count = static_cast<std::int64_t>(reps.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t r = 0; r < count; ++r) {
    try {
      reps[static_cast<std::size_t>(r)] = runner.run(static_cast<std::uint64_t>(r));
    } catch (...) {
#pragma omp critical(obci_coverage_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return runner.finish(reps);
}

CoverageReport coverage_experiment(const CoverageConfig& config, Execution exec,
                                   CriticalValueSource* critical) {
  return exec == Execution::serial ? coverage_experiment_serial(config, critical)
                                   : coverage_experiment_parallel(config, critical);
}

std::vector<CoverageReport> offset_sweep(const CoverageConfig& base,
                                         const std::vector<std::size_t>& offsets,
                                         Execution exec, CriticalValueSource* critical) {
  std::vector<CoverageReport> out;
  out.reserve(offsets.size());
  for (std::size_t d : offsets) {
    CoverageConfig config = base;
    config.method.d = d;
    out.push_back(coverage_experiment(config, exec, critical));
  }
  return out;
}

namespace {

std::string fmt_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

CoverageConfig make_cell(const std::string& study, GeneratorKind kind, EstimatorPtr est,
                         double truth, std::size_t n, Procedure method, double beta,
                         std::size_t d) {
  CoverageConfig c;
  c.study = study;
  c.generator = {kind, n};
  c.estimator = std::move(est);
  c.truth = truth;
  c.method.method = method;
  c.method.beta = beta;
  c.method.d = d;
  return c;
}

}  // namespace

std::vector<CoveragePreset> coverage_presets() {
  std::vector<CoveragePreset> out;
  const auto add = [&](const std::string& stem, CoverageConfig c) {
    std::string name = stem + "-" + std::string(to_string(c.method.method));
    if (c.method.method != Procedure::ss) name += "-b" + fmt_short(c.method.beta);
    if (c.method.d != 1) name += "-d" + std::to_string(c.method.d);
    out.push_back({name, std::move(c)});
  };
  const Procedure ob[] = {Procedure::ob1, Procedure::ob2, Procedure::ob3};

  for (double gamma : {0.7, 0.9}) {
    for (std::size_t n : {500u, 1000u}) {
      const std::string stem = "cvar-g" + fmt_short(gamma) + "-n" + std::to_string(n);
      for (Procedure p : ob) {
        for (double beta : {0.0, 0.25}) {
          add(stem, make_cell("cvar", IidNormal{}, cvar_estimator(gamma), normal_cvar(gamma), n,
                              p, beta, 1));
        }
      }
      add(stem, make_cell("cvar", IidNormal{}, cvar_estimator(gamma), normal_cvar(gamma), n,
                          Procedure::ss, 0.0, 1));
    }
  }
  for (double phi : {0.5, 0.9}) {
    const std::string stem = "ar1-phi" + fmt_short(phi) + "-n1000";
    for (Procedure p : ob) {
      for (double beta : {0.0, 0.25}) {
        add(stem, make_cell("ar1", Ar1Process{phi}, ar1_estimator(), phi, 1000, p, beta, 1));
      }
    }
    add(stem, make_cell("ar1", Ar1Process{phi}, ar1_estimator(), phi, 1000, Procedure::ss, 0.0, 1));
  }
  {
    const NhppIncrements rate;
    const double truth = rate.a + rate.b * rate.t;
    for (Procedure p : ob) {
      add("nhpp-n50000", make_cell("nhpp", rate, nhpp_rate_estimator(rate.delta), truth, 50000, p,
                                   0.25, 1));
    }
  }
  for (std::size_t d : {1u, 250u, 500u}) {
    add("offset-cvar-g0.9-n1000", make_cell("offset", IidNormal{}, cvar_estimator(0.9),
                                            normal_cvar(0.9), 1000, Procedure::ob1, 0.25, d));
  }
  return out;
}

std::optional<CoverageConfig> find_preset(const std::string& name) {
  for (auto& p : coverage_presets()) {
    if (p.name == name) return p.config;
  }
  return std::nullopt;
}

}  // namespace obci
