#include "obci/limits.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace obci {

BatchCount BatchCount::finite(std::size_t b) {
  if (b < 2) throw std::invalid_argument("BatchCount: finite b_inf must be >= 2");
  BatchCount c;
  c.b_ = b;
  return c;
}

BatchCount BatchCount::parse(std::string_view text) {
  if (text == "inf" || text == "INF" || text == "infinite") return infinite();
  std::size_t b = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, b);
  if (res.ec != std::errc() || res.ptr != end) {
    throw std::invalid_argument("BatchCount: cannot parse '" + std::string(text) + "'");
  }
  return finite(b);
}

std::size_t BatchCount::value() const {
  if (is_infinite()) throw std::logic_error("BatchCount: infinite has no integer value");
  return b_;
}

std::string BatchCount::str() const { return is_infinite() ? "inf" : std::to_string(b_); }

void BatchAsymptotics::validate() const {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in [0, 1)");
  if (!(eta >= 0.0)) throw std::invalid_argument("eta must be nonnegative");
}

double BatchAsymptotics::d_lim() const {
  if (eta == 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 - beta) / eta;
}

double kappa1(double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("kappa1: beta must lie in [0, 1)");
  return 1.0 - beta;
}

double kappa2(double beta, BatchCount b_inf) {
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("kappa2: beta must lie in [0, 1)");
  if (beta == 0.0) return 1.0;
  if (b_inf.is_infinite()) {
    const double g = std::min(beta / (1.0 - beta), 1.0);
    return 1.0 - 2.0 * g + g * g / beta - (2.0 / 3.0) * ((1.0 - beta) / beta) * g * g * g;
  }
  const auto b = static_cast<double>(b_inf.value());
  const double slope = (1.0 - beta) / (beta * (b - 1.0));
  double acc = 0.0;
  for (std::size_t h = 1; h <= b_inf.value(); ++h) {
    const double hd = static_cast<double>(h);
    const double lag = 1.0 - hd * slope;
    if (lag > 0.0) acc += lag * (1.0 - hd / b);
  }
  return 1.0 - 1.0 / b - (2.0 / b) * acc;
}

double kappa2(const BatchAsymptotics& asym) {
  asym.validate();
  return kappa2(asym.beta, asym.b_inf);
}

double LimitSample::t() const { return numerator / std::sqrt(chi2); }

namespace {

void require_positive_beta(const BatchAsymptotics& asym, const char* who) {
  asym.validate();
  if (asym.beta == 0.0) {
    throw std::invalid_argument(std::string(who) + ": beta = 0 has a normal limit; use normal quantiles");
  }
}

// Batch length in grid cells on a unit-horizon path.
std::size_t unit_batch_cells(double beta, const WienerPath& path) {
  if (std::abs(path.horizon() - 1.0) > 1e-9) {
    throw std::invalid_argument("OB-I/OB-II limit samplers expect a path on [0, 1]");
  }
  const std::size_t n = path.grid_count();
  if (n < 2) throw std::invalid_argument("limit sampler: grid too coarse");
  const auto s = static_cast<std::size_t>(std::llround(beta * static_cast<double>(n)));
  return std::clamp<std::size_t>(s, 1, n - 1);
}

// a_j = round((j-1) span / (b-1)), j = 1..b.
std::size_t finite_start(std::size_t j, std::size_t span, std::size_t b) {
  const double c = static_cast<double>(j) * static_cast<double>(span) / static_cast<double>(b - 1);
  return std::min(static_cast<std::size_t>(std::llround(c)), span);
}

}  // namespace

LimitSample sample_obi_limit(const BatchAsymptotics& asym, const WienerPath& path) {
  require_positive_beta(asym, "sample_obi_limit");
  const auto w = path.values();
  const std::size_t n = path.grid_count();
  const std::size_t s = unit_batch_cells(asym.beta, path);
  const double beta = static_cast<double>(s) / static_cast<double>(n);
  const double w1 = w[n];
  const double shift = beta * w1;

  LimitSample out;
  out.numerator = w1;
  double acc = 0.0;
  if (asym.b_inf.is_infinite()) {
    for (std::size_t k = 0; k < n - s; ++k) {
      const double dk = w[k + s] - w[k] - shift;
      acc += dk * dk;
    }
    acc /= static_cast<double>(n);
    out.chi2 = acc / (kappa1(beta) * beta * (1.0 - beta));
  } else {
    const std::size_t b = asym.b_inf.value();
    for (std::size_t j = 0; j < b; ++j) {
      const std::size_t a = finite_start(j, n - s, b);
      const double dj = w[a + s] - w[a] - shift;
      acc += dj * dj;
    }
    out.chi2 = acc / (kappa1(beta) * beta * static_cast<double>(b));
  }
  return out;
}

LimitSample sample_obii_limit(const BatchAsymptotics& asym, const WienerPath& path) {
  require_positive_beta(asym, "sample_obii_limit");
  const auto w = path.values();
  const std::size_t n = path.grid_count();
  const std::size_t s = unit_batch_cells(asym.beta, path);
  const double beta = static_cast<double>(s) / static_cast<double>(n);
  const double k2 = kappa2(beta, asym.b_inf);

  // Two passes: mean first, then centered sum of squares.
  LimitSample out;
  if (asym.b_inf.is_infinite()) {
    const std::size_t count = n - s;
    double sum = 0.0;
    for (std::size_t k = 0; k < count; ++k) sum += w[k + s] - w[k];
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      const double e = w[k + s] - w[k] - mean;
      ss += e * e;
    }
    out.numerator = mean / beta;
    out.chi2 = (ss / static_cast<double>(n)) / (k2 * beta * (1.0 - beta));
  } else {
    const std::size_t b = asym.b_inf.value();
    double sum = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      const std::size_t a = finite_start(j, n - s, b);
      sum += w[a + s] - w[a];
    }
    const double mean = sum / static_cast<double>(b);
    double ss = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      const std::size_t a = finite_start(j, n - s, b);
      const double e = w[a + s] - w[a] - mean;
      ss += e * e;
    }
    out.numerator = mean / beta;
    out.chi2 = ss / (k2 * beta * static_cast<double>(b));
  }
  return out;
}

namespace {

LimitSample obiii_from_path(const BatchAsymptotics& asym, const WeightFunction& weight,
                            const WienerPath& path, std::vector<double>& scratch) {
  const std::size_t g = path.grid_count();
  const auto per_unit = static_cast<std::size_t>(
      std::llround(static_cast<double>(g) / path.horizon()));
  if (per_unit == 0 || per_unit >= g) {
    throw std::invalid_argument("sample_obiii_limit: path must span more than one unit batch");
  }
  const std::size_t span = g - per_unit;

  LimitSample out;
  out.numerator = path[g] / std::sqrt(path.horizon());
  if (asym.b_inf.is_infinite()) {
    scratch.resize(span);
    bridge_weight_integrals(path, per_unit, weight, scratch);
    double acc = 0.0;
    for (double v : scratch) acc += v * v;
    out.chi2 = acc / static_cast<double>(span);
  } else {
    const std::size_t b = asym.b_inf.value();
    double acc = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      const std::size_t a = finite_start(j, span, b);
      const double step = path.step();
      const double v = bridge_weight_integral(path, static_cast<double>(a) * step, weight);
      acc += v * v;
    }
    out.chi2 = acc / static_cast<double>(b);
  }
  return out;
}

std::size_t obiii_grid(double beta, std::size_t grid_per_unit) {
  const auto g = static_cast<std::size_t>(
      std::llround(static_cast<double>(grid_per_unit) / beta));
  return std::max(g, grid_per_unit + 1);
}

}  // namespace

LimitSample sample_obiii_limit(const BatchAsymptotics& asym, const WeightFunction& weight,
                               const WienerPath& path) {
  require_positive_beta(asym, "sample_obiii_limit");
  std::vector<double> scratch;
  return obiii_from_path(asym, weight, path, scratch);
}

namespace {

// Per-worker sampler reusing its path and scratch storage across draws.
class LimitSampler {
 public:
  explicit LimitSampler(const LimitConfig& config) : config_(config) {
    if (config.method == Procedure::ss) {
      throw std::invalid_argument("limit draws are defined for ob1, ob2 and ob3 only");
    }
    require_positive_beta(config.asym, "limit sampler");
    if (config.grid < 2) throw std::invalid_argument("limit sampler: grid must be >= 2");
    if (config.method == Procedure::ob3) {
      cells_ = obiii_grid(config.asym.beta, config.grid);
      horizon_ = static_cast<double>(cells_) / static_cast<double>(config.grid);
    } else {
      cells_ = config.grid;
      horizon_ = 1.0;
    }
  }

  LimitSample once(Philox4x32& engine) {
    simulate_wiener_into(path_, horizon_, cells_, engine);
    switch (config_.method) {
      case Procedure::ob1: return sample_obi_limit(config_.asym, path_);
      case Procedure::ob2: return sample_obii_limit(config_.asym, path_);
      default: return obiii_from_path(config_.asym, config_.weight, path_, scratch_);
    }
  }

  // Replication r: redraws on the same stream until chi2 > 0.
  LimitSample replicate(std::uint64_t r, std::size_t& redraws) {
    Philox4x32 engine(SeedSpec{config_.seed, r});
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const LimitSample s = once(engine);
      if (s.chi2 > 0.0) return s;
      ++redraws;
    }
    throw std::runtime_error("limit sampler: chi2 stayed zero after 1000 redraws");
  }

 private:
  const LimitConfig& config_;
  std::size_t cells_ = 0;
  double horizon_ = 1.0;
  WienerPath path_;
  std::vector<double> scratch_;
};

}  // namespace

LimitSample sample_limit(Procedure method, const BatchAsymptotics& asym,
                         const WeightFunction& weight, SeedSpec seed, std::size_t grid_per_unit) {
  LimitConfig config;
  config.method = method;
  config.asym = asym;
  config.grid = grid_per_unit;
  config.seed = seed.master_seed;
  config.weight = weight;
  LimitSampler sampler(config);
  Philox4x32 engine(seed);
  return sampler.once(engine);
}

LimitDraws draw_limits_serial(const LimitConfig& config) {
  LimitSampler sampler(config);
  LimitDraws out;
  out.samples.resize(config.replications);
  for (std::size_t r = 0; r < config.replications; ++r) {
    out.samples[r] = sampler.replicate(r, out.redraws);
  }
  return out;
}

LimitDraws draw_limits_parallel(const LimitConfig& config) {
  LimitSampler probe(config);  // validates before entering the parallel region
  (void)probe;
  LimitDraws out;
  out.samples.resize(config.replications);
  const auto reps = static_cast<std::int64_t>(config.replications);
  std::size_t redraws = 0;
  bool failed = false;
#pragma omp parallel reduction(+ : redraws) reduction(|| : failed)
  {
    LimitSampler sampler(config);
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t r = 0; r < reps; ++r) {
      try {
        out.samples[static_cast<std::size_t>(r)] =
            sampler.replicate(static_cast<std::uint64_t>(r), redraws);
      } catch (...) {
        failed = true;
      }
    }
  }
  if (failed) throw std::runtime_error("limit sampler: chi2 stayed zero after 1000 redraws");
  out.redraws = redraws;
  return out;
}

LimitDraws draw_limits(const LimitConfig& config, Execution exec) {
  return exec == Execution::serial ? draw_limits_serial(config) : draw_limits_parallel(config);
}

double empirical_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("empirical_quantile: no values");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("empirical_quantile: q must lie in (0, 1)");
  const double pos = q * static_cast<double>(sorted.size());
  // guard against q * R landing a hair above an integer
  auto k = static_cast<std::size_t>(std::ceil(pos - 1e-9 * pos));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

namespace {

void check_quantile(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
}

}  // namespace

std::vector<double> critical_values(const LimitConfig& config, std::span<const double> qs,
                                    Execution exec, std::size_t* redraws) {
  for (double q : qs) check_quantile(q);
  config.asym.validate();
  std::vector<double> out;
  out.reserve(qs.size());
  if (redraws) *redraws = 0;
  if (config.asym.beta == 0.0) {
    for (double q : qs) out.push_back(normal_quantile(q));
    return out;
  }
  if (config.replications < 10000) {
    throw std::invalid_argument("critical_value: need at least 1e4 replications");
  }
  const LimitDraws draws = draw_limits(config, exec);
  std::vector<double> t(draws.samples.size());
  std::transform(draws.samples.begin(), draws.samples.end(), t.begin(),
                 [](const LimitSample& s) { return s.t(); });
  std::sort(t.begin(), t.end());
  for (double q : qs) out.push_back(empirical_quantile(t, q));
  if (redraws) *redraws = draws.redraws;
  return out;
}

CriticalValue critical_value(const LimitConfig& config, double q, Execution exec) {
  CriticalValue cv;
  const double qs[] = {q};
  cv.value = critical_values(config, qs, exec, &cv.redraws).front();
  return cv;
}

double round_significant6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return std::strtod(buf, nullptr);
}

namespace {

std::string format_g(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <class T>
T parse_number(const std::string& text, std::size_t line) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ParseError("bad numeric field '" + text + "'", line);
  }
  return v;
}

}  // namespace

void CriticalValueTable::write_csv(std::ostream& out) const {
  out << kHeader << '\n';
  for (const auto& e : entries_) {
    out << to_string(e.method) << ',' << format_g(e.beta, 10) << ',' << e.b_inf.str() << ','
        << format_g(e.q, 10) << ',' << format_g(e.value, 6) << ',' << e.replications << ','
        << e.grid << ',' << e.seed << '\n';
  }
}

CriticalValueTable CriticalValueTable::read_csv(std::istream& in) {
  CriticalValueTable table;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != kHeader) throw ParseError("unexpected critical-value table header", lineno);
      header = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 8) throw ParseError("expected 8 fields", lineno);
    CriticalValueEntry e;
    try {
      e.method = parse_procedure(f[0]);
      e.b_inf = BatchCount::parse(f[2]);
    } catch (const std::invalid_argument& err) {
      throw ParseError(err.what(), lineno);
    }
    e.beta = parse_number<double>(f[1], lineno);
    e.q = parse_number<double>(f[3], lineno);
    e.value = parse_number<double>(f[4], lineno);
    e.replications = parse_number<std::size_t>(f[5], lineno);
    e.grid = parse_number<std::size_t>(f[6], lineno);
    e.seed = parse_number<std::uint64_t>(f[7], lineno);
    table.add(e);
  }
  if (!header) throw ParseError("empty critical-value table", lineno);
  return table;
}

CriticalValueTable CriticalValueTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open critical-value table '" + path + "'");
  return read_csv(in);
}

std::optional<CriticalValueTable::Match> CriticalValueTable::lookup(Procedure method, double beta,
                                                                    BatchCount b_inf,
                                                                    double q) const {
  std::optional<Match> best;
  for (const auto& e : entries_) {
    if (e.method != method || !(e.b_inf == b_inf) || std::abs(e.q - q) >= 1e-9) continue;
    const double gap = std::abs(e.beta - beta);
    if (!best || gap < best->beta_gap) best = Match{&e, gap};
  }
  return best;
}

double obi_asymptotic_variance(const BatchAsymptotics& asym, double sigma) {
  asym.validate();
  const double beta = asym.beta;
  if (!(beta > 0.0)) throw std::invalid_argument("obi_asymptotic_variance: beta must be positive");
  const double g = std::min(beta / (1.0 - beta), 1.0);
  const bool inf = asym.b_inf.is_infinite();
  const double ind_half = beta <= 0.5 ? 1.0 : 0.0;

  double mu0_tilde = 0.0;
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
  if (inf) {
    const double r = (1.0 - 2.0 * beta) / (1.0 - beta);
    mu0_tilde = 0.5 * r * r * ind_half;
    mu0 = g * (1.0 - 0.5 * g);
    const double ratio = asym.eta / beta;
    mu1 = (1.0 / 6.0) * g * g * ratio * (3.0 - 2.0 * g);
    mu2 = 0.5 * g * g * g * ratio * ratio * (2.0 / 3.0 - 0.5 * g);
  } else {
    const auto b = static_cast<double>(asym.b_inf.value());
    const double c = std::ceil(beta / (1.0 - beta) * (b - 1.0)) / b;
    mu0_tilde = 0.5 * (1.0 - c) * (1.0 - c + 1.0 / b) * ind_half;
    const double fl = std::floor(g * (b - 1.0)) / b;
    mu0 = fl * (1.0 - 0.5 * fl - 0.5);
  }
  // infinity * 0 = 0
  const double d = asym.d_lim();
  const double d_mu1 = mu1 == 0.0 ? 0.0 : d * mu1;
  const double s4 = sigma * sigma * sigma * sigma;
  const double om = 1.0 - beta;
  return s4 / (om * om) *
         (2.0 * (1.0 - 2.0 * beta + 3.0 * beta * beta) * mu0_tilde + 6.0 * om * om * mu0 -
          8.0 * d_mu1 * om + 4.0 * mu2);
}

double obi_variance_fully_overlapping(double beta, double sigma) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("obi_variance_fully_overlapping: beta must lie in (0, 1)");
  }
  const double s4 = sigma * sigma * sigma * sigma;
  const double b2 = beta * beta;
  const double shape = 4.0 * beta - 11.0 * b2 + 4.0 * b2 * beta + 6.0 * b2 * b2;
  const double om = 1.0 - beta;
  return s4 * shape / (3.0 * om * om * om * om);
}

}  // namespace obci
