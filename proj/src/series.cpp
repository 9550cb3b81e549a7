#include "obci/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace obci {

TimeSeriesData::TimeSeriesData(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 2) throw std::invalid_argument("time series needs at least 2 observations");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("time series values must be finite");
  }
}

TimeSeriesData TimeSeriesData::parse(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string_view text(line.data() + first, last - first + 1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
      throw ParseError("not a finite number: '" + std::string(text) + "'", lineno);
    }
    values.push_back(v);
  }
  if (values.size() < 2) throw ParseError("need at least 2 observations", lineno);
  return TimeSeriesData(std::move(values));
}

TimeSeriesData TimeSeriesData::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file '" + path + "'");
  return parse(in);
}

std::vector<std::size_t> BatchLayout::starts() const {
  std::vector<std::size_t> s(b);
  for (std::size_t i = 0; i < b; ++i) s[i] = i * d + 1;
  return s;
}

BatchLayout make_layout(std::size_t n, std::size_t m, std::size_t d) {
  if (m < 1 || m > n) throw std::invalid_argument("layout: need 1 <= m <= n");
  if (d < 1) throw std::invalid_argument("layout: need d >= 1");
  const std::size_t b = (n - m) / d + 1;
  if (b < 2) throw std::invalid_argument("layout: fewer than 2 batches");
  return BatchLayout{n, m, d, b};
}

BatchLayout layout_from_fractions(std::size_t n, double beta_target, std::size_t d) {
  if (!(beta_target > 0.0 && beta_target < 1.0)) {
    throw std::invalid_argument("layout: beta must lie in (0, 1)");
  }
  const auto m = static_cast<std::size_t>(std::llround(beta_target * static_cast<double>(n)));
  if (m < 2 || m + d > n) throw std::invalid_argument("layout: round(beta n) outside [2, n - d]");
  return make_layout(n, m, d);
}

BatchEstimates batch_estimates(const TimeSeriesData& data, const BatchLayout& layout,
                               const FunctionalEstimator& est, Execution exec) {
  if (layout.n != data.size()) throw std::invalid_argument("layout does not match data length");
  if (layout.m < est.min_window()) {
    throw std::invalid_argument("batch size below the estimator's minimum window");
  }
  std::vector<std::optional<double>> raw(layout.b);
  const std::size_t chunks = (layout.b + kBatchChunk - 1) / kBatchChunk;
  const auto run = [&](std::size_t c) {
    const std::size_t first = c * kBatchChunk;
    const std::size_t count = std::min(kBatchChunk, layout.b - first);
    est.sliding(data.values(), layout.m, layout.d, first,
                std::span<std::optional<double>>(raw).subspan(first, count));
  };
  if (exec == Execution::serial) {
    for (std::size_t c = 0; c < chunks; ++c) run(c);
  } else {
    const auto nc = static_cast<std::int64_t>(chunks);
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < nc; ++c) {
      try {
        run(static_cast<std::size_t>(c));
      } catch (...) {
#pragma omp critical(obci_batch_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  }

  BatchEstimates out;
  out.per_batch.resize(layout.b);
  for (std::size_t i = 0; i < layout.b; ++i) {
    if (!raw[i]) throw DegenerateEstimate("undefined estimate in batch " + std::to_string(i + 1));
    out.per_batch[i] = *raw[i];
  }
  const auto full = est.try_estimate(data.values());
  if (!full) throw DegenerateEstimate("undefined estimate on the full series");
  out.sectioning = *full;
  out.batching_mean = std::accumulate(out.per_batch.begin(), out.per_batch.end(), 0.0) /
                      static_cast<double>(layout.b);
  return out;
}

std::vector<std::optional<double>> prefix_estimates(const TimeSeriesData& data,
                                                    const BatchLayout& layout, std::size_t i,
                                                    const FunctionalEstimator& est) {
  if (i >= layout.b) throw std::out_of_range("prefix_estimates: batch index out of range");
  if (layout.n != data.size()) throw std::invalid_argument("layout does not match data length");
  std::vector<std::optional<double>> out(layout.m);
  est.prefixes(data.values().subspan(layout.start(i), layout.m), out);
  return out;
}

}  // namespace obci
