// Small descriptive-statistics helpers shared by the reporting modules.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lpm/types.hpp"

namespace lpm {

/// Linear-interpolation sample quantile (Hyndman-Fan type 7). Sorts a copy.
inline double quantile(std::vector<double> x, double prob) {
  if (x.empty()) throw ValidationError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile probability must lie in [0, 1]");
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

/// Several quantiles from one sort.
inline std::vector<double> quantiles(std::vector<double> x, const std::vector<double>& probs) {
  if (x.empty()) throw ValidationError("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  std::vector<double> out;
  out.reserve(probs.size());
  for (double prob : probs) {
    const double h = (static_cast<double>(x.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, x.size() - 1);
    out.push_back(x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]));
  }
  return out;
}

inline double sample_mean(const std::vector<double>& x) {
  if (x.empty()) throw ValidationError("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Unbiased sample variance (divisor n - 1).
inline double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) throw ValidationError("variance needs at least two values");
  const double m = sample_mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace lpm
