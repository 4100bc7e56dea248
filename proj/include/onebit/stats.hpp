#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "onebit/random.hpp"

namespace onebit {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Midpoint of the two central order statistics for even sizes.
inline double median(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty sample");
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t h = sorted.size() / 2;
  return sorted.size() % 2 == 1 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
}

inline double sample_stddev(std::span<const double> v) {
  if (v.size() < 2) throw std::invalid_argument("sample_stddev: need at least two values");
  const double mu = mean(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool disjoint_from(const Interval& other) const noexcept {
    return hi < other.lo || other.hi < lo;
  }
};

// Percentile bootstrap interval for the mean.
inline Interval bootstrap_mean_interval(std::span<const double> v, double level,
                                        std::size_t resamples, std::uint64_t seed) {
  if (v.empty() || resamples == 0 || !(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("bootstrap_mean_interval: bad arguments");
  }
  Rng rng(seed);
  std::vector<double> means(resamples);
  for (double& m : means) {
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) s += v[rng.below(v.size())];
    m = s / static_cast<double>(v.size());
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1)));
    return means[std::min(idx, resamples - 1)];
  };
  return {at(tail), at(1.0 - tail)};
}

}  // namespace onebit
