#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>

namespace jacpair::stats {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson(std::uint64_t successes, std::uint64_t trials, double z = kZ95) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (ph + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Standard error of a proportion under the null value p0.
inline double proportion_sigma(double p0, std::uint64_t trials) {
  return std::sqrt(p0 * (1.0 - p0) / static_cast<double>(trials));
}

/// z-score of an observed proportion against the null p0.
inline double proportion_z(std::uint64_t successes, std::uint64_t trials, double p0) {
  if (trials == 0) return 0.0;
  const double ph = static_cast<double>(successes) / static_cast<double>(trials);
  const double s = proportion_sigma(p0, trials);
  return s > 0.0 ? (ph - p0) / s : 0.0;
}

/// z-score of log(reference / count) against log(expected_ratio), using the
/// multinomial delta-method variance 1/reference + 1/count.
inline double log_ratio_z(std::uint64_t reference, std::uint64_t count, double expected_ratio) {
  if (reference == 0 || count == 0) return std::nan("");
  const double r = static_cast<double>(reference), c = static_cast<double>(count);
  return (std::log(r / c) - std::log(expected_ratio)) / std::sqrt(1.0 / r + 1.0 / c);
}

/// z-score of log(p1 / p2) for proportions from two independent samples.
inline double two_sample_proportion_z(std::uint64_t c1, std::uint64_t n1, std::uint64_t c2,
                                      std::uint64_t n2) {
  const double a = static_cast<double>(c1), b = static_cast<double>(c2);
  const double na = static_cast<double>(n1), nb = static_cast<double>(n2);
  const double pooled = (a + b) / (na + nb);
  const double s = std::sqrt(pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb));
  return s > 0.0 ? (a / na - b / nb) / s : 0.0;
}

}  // namespace jacpair::stats
