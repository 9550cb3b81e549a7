#include "obci/paths.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include <boost/random/normal_distribution.hpp>

namespace obci {

WeightFunction::WeightFunction(std::string tag, std::function<double(double)> f)
    : tag_(std::move(tag)), f_(std::move(f)) {
  if (!f_) throw std::invalid_argument("WeightFunction: empty evaluator");
}

WeightFunction::WeightFunction(std::string tag, double constant)
    : tag_(std::move(tag)), is_constant_(true), constant_(constant) {}

WeightFunction WeightFunction::constant_sqrt12() {
  return WeightFunction("constant-sqrt12", std::sqrt(12.0));
}

WeightFunction WeightFunction::quadratic() {
  const double c = std::sqrt(840.0);
  return WeightFunction("quadratic-sqrt840",
                        [c](double t) { return c * (3.0 * t * t - 3.0 * t + 0.5); });
}

WeightFunction WeightFunction::from_tag(const std::string& tag) {
  if (tag == "constant-sqrt12") return constant_sqrt12();
  if (tag == "quadratic-sqrt840") return quadratic();
  throw std::invalid_argument("unknown weight function '" + tag + "'");
}

WienerPath::WienerPath(double horizon, std::vector<double> values)
    : horizon_(horizon), values_(std::move(values)) {
  if (!(horizon > 0.0)) throw std::invalid_argument("WienerPath: horizon must be positive");
  if (values_.size() < 2) throw std::invalid_argument("WienerPath: need at least one grid cell");
  if (values_[0] != 0.0) throw std::invalid_argument("WienerPath: values[0] must be 0");
}

std::size_t WienerPath::index_of(double t) const {
  const double tol = 1e-12 * horizon_;
  if (!(t >= -tol && t <= horizon_ + tol)) {
    throw std::out_of_range("WienerPath: time outside [0, horizon]");
  }
  const double x = t / step();
  // nearest grid point, ties toward zero
  const double k = std::ceil(x - 0.5);
  if (k <= 0.0) return 0;
  const auto idx = static_cast<std::size_t>(k);
  return idx > grid_count() ? grid_count() : idx;
}

void simulate_wiener_into(WienerPath& path, double horizon, std::size_t grid_count,
                          Philox4x32& engine) {
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate_wiener: horizon must be positive");
  if (grid_count == 0) throw std::invalid_argument("simulate_wiener: grid_count must be >= 1");
  path.horizon_ = horizon;
  path.values_.resize(grid_count + 1);
  const double sd = std::sqrt(horizon / static_cast<double>(grid_count));
  boost::random::normal_distribution<double> normal;
  double w = 0.0;
  path.values_[0] = 0.0;
  for (std::size_t k = 1; k <= grid_count; ++k) {
    w += sd * normal(engine);
    path.values_[k] = w;
  }
}

WienerPath simulate_wiener(double horizon, std::size_t grid_count, SeedSpec seed) {
  Philox4x32 engine(seed);
  WienerPath path;
  simulate_wiener_into(path, horizon, grid_count, engine);
  return path;
}

double eval_at(const WienerPath& path, double t) { return path[path.index_of(t)]; }

namespace {

std::size_t cells_per_unit(const WienerPath& path) {
  const double per_unit = static_cast<double>(path.grid_count()) / path.horizon();
  const auto m = static_cast<std::size_t>(std::llround(per_unit));
  if (m == 0) throw std::invalid_argument("bridge integral: grid coarser than one cell per unit");
  return m;
}

// (1/M) sum_k f(v_k) B(v_k) over k = 0..M-1, v_k = k/M, bridge starting at grid index k0.
double bridge_sum(std::span<const double> w, std::size_t k0, std::size_t m,
                  const WeightFunction& weight) {
  const double base = w[k0];
  const double rise = w[k0 + m] - base;
  const double inv_m = 1.0 / static_cast<double>(m);
  double acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double v = static_cast<double>(k) * inv_m;
    acc += weight(v) * (w[k0 + k] - base - v * rise);
  }
  return acc * inv_m;
}

}  // namespace

double bridge_weight_integral(const WienerPath& path, double s, const WeightFunction& weight) {
  const std::size_t m = cells_per_unit(path);
  if (s < 0.0 || s + 1.0 > path.horizon() * (1.0 + 1e-12)) {
    throw std::out_of_range("bridge_weight_integral: need 0 <= s and s + 1 <= horizon");
  }
  std::size_t k0 = path.index_of(s);
  if (k0 + m > path.grid_count()) k0 = path.grid_count() - m;
  return bridge_sum(path.values(), k0, m, weight);
}

void bridge_weight_integrals(const WienerPath& path, std::size_t per_unit,
                             const WeightFunction& weight, std::span<double> out) {
  const auto w = path.values();
  const std::size_t m = per_unit;
  if (out.size() + m > path.grid_count() + 1) {
    throw std::out_of_range("bridge_weight_integrals: starts exceed the path");
  }
  if (!weight.is_constant()) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = bridge_sum(w, k, m, weight);
    return;
  }
  // Constant f: (f/M) [sum_{k<M} W(k0+k) - M W(k0) - (W(k0+M) - W(k0)) (M-1)/2].
  const double f = weight(0.0);
  const double inv_m = 1.0 / static_cast<double>(m);
  const double half_span = 0.5 * static_cast<double>(m - 1);
  double window = 0.0;
  for (std::size_t k = 0; k < m; ++k) window += w[k];
  for (std::size_t k0 = 0; k0 < out.size(); ++k0) {
    if (k0 > 0) window += w[k0 + m - 1] - w[k0 - 1];
    const double base = w[k0];
    const double rise = w[k0 + m] - base;
    out[k0] = f * inv_m * (window - static_cast<double>(m) * base - rise * half_span);
  }
}

}  // namespace obci
