#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "obci/rng.hpp"

namespace obci {

// Default number of grid points per unit of time for limit functionals.
inline constexpr std::size_t kDefaultGridPerUnit = 4096;

// Weighting function f on [0,1] for the weighted-area variance estimator.
// Normalized so that E[(int_0^1 f(t) B(t) dt)^2] = 1 for a standard bridge B.
class WeightFunction {
 public:
  // f(t) = sqrt(12).
  static WeightFunction constant_sqrt12();
  // f(t) = sqrt(840) (3t^2 - 3t + 1/2), the classical quadratic area weight.
  static WeightFunction quadratic();
  // Looks up one of the named weights above; throws std::invalid_argument.
  static WeightFunction from_tag(const std::string& tag);

  WeightFunction(std::string tag, std::function<double(double)> f);

  double operator()(double t) const { return is_constant_ ? constant_ : f_(t); }
  const std::string& tag() const { return tag_; }
  bool is_constant() const { return is_constant_; }

 private:
  WeightFunction(std::string tag, double constant);

  std::string tag_;
  std::function<double(double)> f_;
  bool is_constant_ = false;
  double constant_ = 0.0;
};

// Standard Wiener path sampled on a uniform grid: values[k] ~ W(k * horizon / grid_count).
class WienerPath {
 public:
  WienerPath() = default;
  // Wraps caller-supplied values (deterministic injection for tests).
  // values.size() must be grid_count + 1 and values[0] must be 0.
  WienerPath(double horizon, std::vector<double> values);

  double horizon() const { return horizon_; }
  std::size_t grid_count() const { return values_.empty() ? 0 : values_.size() - 1; }
  double step() const { return horizon_ / static_cast<double>(grid_count()); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

  // Nearest grid index to time t, ties toward zero. Throws for t outside [0, horizon].
  std::size_t index_of(double t) const;

 private:
  friend void simulate_wiener_into(WienerPath& path, double horizon, std::size_t grid_count,
                                   Philox4x32& engine);

  double horizon_ = 0.0;
  std::vector<double> values_;
};

WienerPath simulate_wiener(double horizon, std::size_t grid_count, SeedSpec seed);

// Refills `path` in place from `engine`, reusing its storage.
void simulate_wiener_into(WienerPath& path, double horizon, std::size_t grid_count,
                          Philox4x32& engine);

double eval_at(const WienerPath& path, double t);

// Left-endpoint Riemann sum of int_0^1 f(v) B_s(v) dv where
// B_s(v) = W(s+v) - W(s) - v (W(s+1) - W(s)). Requires s + 1 <= horizon.
double bridge_weight_integral(const WienerPath& path, double s, const WeightFunction& weight);

// Same integral for every grid start k in [0, count): out[k] uses s = k * step.
// Uses prefix sums for constant weights, direct sums otherwise.
void bridge_weight_integrals(const WienerPath& path, std::size_t per_unit,
                             const WeightFunction& weight, std::span<double> out);

}  // namespace obci
