#include "obci/functionals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "obci/common.hpp"

namespace obci {

std::optional<double> FunctionalEstimator::try_estimate(std::span<const double> window) const {
  try {
    return estimate(window);
  } catch (const DegenerateEstimate&) {
    return std::nullopt;
  }
}

void FunctionalEstimator::sliding(std::span<const double> data, std::size_t m, std::size_t d,
                                  std::size_t first, std::span<std::optional<double>> out) const {
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = try_estimate(data.subspan((first + k) * d, m));
  }
}

void FunctionalEstimator::prefixes(std::span<const double> window,
                                   std::span<std::optional<double>> out) const {
  const std::size_t lo = min_window();
  for (std::size_t j = 1; j <= out.size(); ++j) {
    out[j - 1] = j < lo ? std::nullopt : try_estimate(window.first(j));
  }
}

std::size_t quantile_rank(double gamma, std::size_t w) {
  const double x = gamma * static_cast<double>(w);
  const auto k = static_cast<std::size_t>(std::ceil(x - 1e-12 * x));
  return std::clamp<std::size_t>(k, 1, w);
}

namespace {

void check_window(std::span<const double> window, std::size_t min_window, const char* who) {
  if (window.size() < min_window) {
    throw std::invalid_argument(std::string(who) + ": window shorter than " +
                                std::to_string(min_window));
  }
}

// Window means over data[(first + k) d, ... + m) via a rolling sum of
// deviations from data[0], which keeps constant windows exact.
void rolling_means(std::span<const double> data, std::size_t m, std::size_t d, std::size_t first,
                   std::span<std::optional<double>> out, double scale) {
  if (out.empty()) return;
  const double ref = data[0];
  const double inv = 1.0 / static_cast<double>(m);
  const auto dev_sum = [&](std::size_t from, std::size_t count) {
    double acc = 0.0;
    for (std::size_t j = from; j < from + count; ++j) acc += data[j] - ref;
    return acc;
  };
  std::size_t start = first * d;
  double sum = dev_sum(start, m);
  out[0] = (ref + sum * inv) / scale;
  for (std::size_t k = 1; k < out.size(); ++k) {
    const std::size_t next = start + d;
    if (d < m) {
      sum += dev_sum(start + m, d) - dev_sum(start, d);
    } else {
      sum = dev_sum(next, m);
    }
    start = next;
    out[k] = (ref + sum * inv) / scale;
  }
}

double centered_mean(std::span<const double> w) {
  const double ref = w[0];
  double acc = 0.0;
  for (double x : w) acc += x - ref;
  return ref + acc / static_cast<double>(w.size());
}

class MeanEstimator final : public FunctionalEstimator {
 public:
  double estimate(std::span<const double> w) const override {
    check_window(w, 1, "mean");
    return centered_mean(w);
  }
  std::size_t min_window() const override { return 1; }
  std::string tag() const override { return "mean"; }

  void sliding(std::span<const double> data, std::size_t m, std::size_t d, std::size_t first,
               std::span<std::optional<double>> out) const override {
    rolling_means(data, m, d, first, out, 1.0);
  }

  void prefixes(std::span<const double> w, std::span<std::optional<double>> out) const override {
    double sum = 0.0;
    for (std::size_t j = 1; j <= out.size(); ++j) {
      sum += w[j - 1] - w[0];
      out[j - 1] = w[0] + sum / static_cast<double>(j);
    }
  }
};

class QuantileEstimator final : public FunctionalEstimator {
 public:
  explicit QuantileEstimator(double gamma) : gamma_(gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("quantile: gamma must lie in (0, 1)");
  }

  double estimate(std::span<const double> w) const override {
    check_window(w, 1, "quantile");
    std::vector<double> v(w.begin(), w.end());
    const std::size_t k = quantile_rank(gamma_, v.size());
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
    return v[k - 1];
  }
  std::size_t min_window() const override { return 1; }
  std::string tag() const override { return "quantile:" + fmt(gamma_); }

  void prefixes(std::span<const double> w, std::span<std::optional<double>> out) const override {
    std::vector<double> sorted;
    sorted.reserve(out.size());
    for (std::size_t j = 1; j <= out.size(); ++j) {
      sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), w[j - 1]), w[j - 1]);
      out[j - 1] = sorted[quantile_rank(gamma_, j) - 1];
    }
  }

  static std::string fmt(double x) {
    std::string s = std::to_string(x);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

 private:
  double gamma_;
};

class CvarEstimator final : public FunctionalEstimator {
 public:
  CvarEstimator(double gamma, std::optional<CvarKnownQuantile> known)
      : gamma_(gamma), known_(known) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("cvar: gamma must lie in (0, 1)");
    std::size_t w = 1;
    while (quantile_rank(gamma_, w) >= w) ++w;
    min_window_ = w;
  }

  double estimate(std::span<const double> w) const override {
    check_window(w, min_window_, "cvar");
    double q = 0.0;
    if (known_) {
      q = known_->q;
    } else {
      std::vector<double> v(w.begin(), w.end());
      const std::size_t k = quantile_rank(gamma_, v.size());
      std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
      q = v[k - 1];
    }
    double sum = 0.0;
    std::size_t hits = 0;
    for (double z : w) {
      if (z >= q) {
        sum += z;
        ++hits;
      }
    }
    if (hits == 0) throw DegenerateEstimate("cvar: no observation at or above the quantile");
    return sum / (static_cast<double>(w.size()) * (1.0 - gamma_));
  }
  std::size_t min_window() const override { return min_window_; }
  std::string tag() const override {
    std::string t = "cvar:" + QuantileEstimator::fmt(gamma_);
    if (known_) t += ":" + QuantileEstimator::fmt(known_->q);
    return t;
  }

  void prefixes(std::span<const double> w, std::span<std::optional<double>> out) const override {
    std::vector<double> sorted;
    sorted.reserve(out.size());
    for (std::size_t j = 1; j <= out.size(); ++j) {
      sorted.insert(std::upper_bound(sorted.begin(), sorted.end(), w[j - 1]), w[j - 1]);
      if (j < min_window_) {
        out[j - 1] = std::nullopt;
        continue;
      }
      const double q = known_ ? known_->q : sorted[quantile_rank(gamma_, j) - 1];
      const auto from = std::lower_bound(sorted.begin(), sorted.end(), q);
      if (from == sorted.end()) {
        out[j - 1] = std::nullopt;
        continue;
      }
      const double sum = std::accumulate(from, sorted.end(), 0.0);
      out[j - 1] = sum / (static_cast<double>(j) * (1.0 - gamma_));
    }
  }

 private:
  double gamma_;
  std::optional<CvarKnownQuantile> known_;
  std::size_t min_window_ = 2;
};

class Ar1Estimator final : public FunctionalEstimator {
 public:
  double estimate(std::span<const double> w) const override {
    check_window(w, 2, "ar1");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j + 1 < w.size(); ++j) {
      num += w[j] * w[j + 1];
      den += w[j] * w[j];
    }
    if (den == 0.0) throw DegenerateEstimate("ar1: zero denominator");
    return num / den;
  }
  std::size_t min_window() const override { return 2; }
  std::string tag() const override { return "ar1"; }

  void prefixes(std::span<const double> w, std::span<std::optional<double>> out) const override {
    double num = 0.0;
    double den = 0.0;
    if (!out.empty()) out[0] = std::nullopt;
    for (std::size_t j = 2; j <= out.size(); ++j) {
      num += w[j - 2] * w[j - 1];
      den += w[j - 2] * w[j - 2];
      out[j - 1] = den == 0.0 ? std::nullopt : std::optional<double>(num / den);
    }
  }
};

class NhppRateEstimator final : public FunctionalEstimator {
 public:
  explicit NhppRateEstimator(double delta) : delta_(delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("nhpp: delta must be positive");
  }

  double estimate(std::span<const double> w) const override {
    check_window(w, 1, "nhpp");
    for (double x : w) {
      if (x < 0.0) throw std::invalid_argument("nhpp: negative increment count");
    }
    return centered_mean(w) / delta_;
  }
  std::size_t min_window() const override { return 1; }
  std::string tag() const override { return "nhpp:" + QuantileEstimator::fmt(delta_); }

  void sliding(std::span<const double> data, std::size_t m, std::size_t d, std::size_t first,
               std::span<std::optional<double>> out) const override {
    rolling_means(data, m, d, first, out, delta_);
  }

  void prefixes(std::span<const double> w, std::span<std::optional<double>> out) const override {
    double sum = 0.0;
    for (std::size_t j = 1; j <= out.size(); ++j) {
      sum += w[j - 1] - w[0];
      out[j - 1] = (w[0] + sum / static_cast<double>(j)) / delta_;
    }
  }

 private:
  double delta_;
};

double parse_real(std::string_view text, std::string_view tag) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw std::invalid_argument("bad number in estimator tag '" + std::string(tag) + "'");
  }
  return v;
}

}  // namespace

EstimatorPtr mean_estimator() { return std::make_shared<MeanEstimator>(); }
EstimatorPtr quantile_estimator(double gamma) { return std::make_shared<QuantileEstimator>(gamma); }
EstimatorPtr cvar_estimator(double gamma, std::optional<CvarKnownQuantile> known) {
  return std::make_shared<CvarEstimator>(gamma, known);
}
EstimatorPtr ar1_estimator() { return std::make_shared<Ar1Estimator>(); }
EstimatorPtr nhpp_rate_estimator(double delta) { return std::make_shared<NhppRateEstimator>(delta); }

EstimatorPtr parse_estimator(std::string_view tag) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t c = tag.find(':', pos);
    parts.push_back(tag.substr(pos, c == std::string_view::npos ? std::string_view::npos : c - pos));
    if (c == std::string_view::npos) break;
    pos = c + 1;
  }
  const auto& name = parts[0];
  if (name == "mean" && parts.size() == 1) return mean_estimator();
  if (name == "ar1" && parts.size() == 1) return ar1_estimator();
  if (name == "quantile" && parts.size() == 2) return quantile_estimator(parse_real(parts[1], tag));
  if (name == "nhpp" && parts.size() == 2) return nhpp_rate_estimator(parse_real(parts[1], tag));
  if (name == "cvar" && (parts.size() == 2 || parts.size() == 3)) {
    const double gamma = parse_real(parts[1], tag);
    if (parts.size() == 3) return cvar_estimator(gamma, CvarKnownQuantile{parse_real(parts[2], tag)});
    return cvar_estimator(gamma);
  }
  throw std::invalid_argument("unknown estimator tag '" + std::string(tag) + "'");
}

}  // namespace obci
