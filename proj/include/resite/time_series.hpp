#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "resite/error.hpp"

namespace resite {

// Regularly sampled series of finite values. Non-empty by construction.
class TimeSeries {
public:
  explicit TimeSeries(std::vector<double> values, double resolution_hours = 1.0,
                      std::string start_label = {})
      : values_(std::move(values)),
        resolution_hours_(resolution_hours),
        start_label_(std::move(start_label)) {
    if (values_.empty()) throw InvalidInput("time series must contain at least one value");
    if (!(resolution_hours_ > 0.0) || !std::isfinite(resolution_hours_))
      throw InvalidInput("time series resolution must be positive");
    for (std::size_t t = 0; t < values_.size(); ++t)
      if (!std::isfinite(values_[t]))
        throw InvalidInput("non-finite value at period " + std::to_string(t));
  }

  std::span<const double> values() const { return values_; }
  const std::vector<double>& vector() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t t) const { return values_[t]; }
  double resolution_hours() const { return resolution_hours_; }
  const std::string& start_label() const { return start_label_; }

  double sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }
  double mean() const { return sum() / static_cast<double>(values_.size()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }

  TimeSeries with_values(std::vector<double> values) const {
    return TimeSeries(std::move(values), resolution_hours_, start_label_);
  }

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
  std::vector<double> values_;
  double resolution_hours_;
  std::string start_label_;
};

// Block means over consecutive groups of `factor` periods.
inline TimeSeries resample_mean(const TimeSeries& series, std::size_t factor) {
  if (factor == 0) throw InvalidInput("resample factor must be positive");
  const std::size_t n = series.size();
  if (n % factor != 0)
    throw InvalidInput("series length " + std::to_string(n) + " is not divisible by " +
                       std::to_string(factor) + " (remainder " + std::to_string(n % factor) +
                       ")");
  if (factor == 1) return series;
  std::vector<double> out(n / factor);
  for (std::size_t b = 0; b < out.size(); ++b) {
    double s = 0.0;
    for (std::size_t j = 0; j < factor; ++j) s += series[b * factor + j];
    out[b] = s / static_cast<double>(factor);
  }
  return TimeSeries(std::move(out), series.resolution_hours() * static_cast<double>(factor),
                    series.start_label());
}

// Mean over each overlapping window of `delta` periods; W = T - delta + 1 values.
inline std::vector<double> window_aggregate(std::span<const double> values, std::size_t delta) {
  if (delta == 0) throw InvalidInput("window length must be positive");
  if (delta > values.size())
    throw InvalidInput("window length " + std::to_string(delta) + " exceeds series length " +
                       std::to_string(values.size()));
  if (delta == 1) return {values.begin(), values.end()};
  const std::size_t windows = values.size() - delta + 1;
  std::vector<double> out(windows);
  for (std::size_t w = 0; w < windows; ++w) {
    double s = 0.0;
    for (std::size_t j = 0; j < delta; ++j) s += values[w + j];
    out[w] = s / static_cast<double>(delta);
  }
  return out;
}

inline std::vector<double> window_aggregate(const TimeSeries& series, std::size_t delta) {
  return window_aggregate(series.values(), delta);
}

// Empirical quantile with linear interpolation between order statistics
// (position q * (n - 1) in the sorted sample).
inline double quantile_linear(std::span<const double> values, double q) {
  if (values.empty()) throw InvalidInput("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInput("quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// ceil() that forgives floating noise just above an integer, e.g. 2.0000000000004 -> 2.
inline double ceil_tolerant(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return r;
  return std::ceil(x);
}

}  // namespace resite
