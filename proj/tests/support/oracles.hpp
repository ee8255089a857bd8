#pragma once

// Independent reference implementations used only to cross-check the
// library. These deliberately avoid the library's own code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "pairtest/math.hpp"
#include "pairtest/power.hpp"

namespace oracles {

// Naive streaming mean/variance in input order (no sorting).
inline double naive_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double naive_sample_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = naive_mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

// Closed-form total sample size (both systems) for a two-sample two-sided
// normal test, adjusted by the Mann-Whitney asymptotic relative efficiency.
inline double normal_theory_total_n(double delta, double sigma, double alpha,
                                    double target_power) {
  const double z_alpha = pairtest::normal_quantile(1.0 - alpha / 2.0);
  const double z_beta = pairtest::normal_quantile(target_power);
  const double per_system = 2.0 * sigma * sigma * (z_alpha + z_beta) * (z_alpha + z_beta) /
                            (delta * delta);
  return 2.0 * per_system;
}

inline double mwu_theory_total_n(double delta, double sigma, double alpha, double target_power) {
  constexpr double kAsymptoticRelativeEfficiency = 0.955;  // 3/pi
  return normal_theory_total_n(delta, sigma, alpha, target_power) /
         kAsymptoticRelativeEfficiency;
}

// Brute-force observed-MDE scan: tries every observed abs_diff as the
// threshold independently and keeps the smallest that meets the rate.
struct BruteMde {
  double mde;
  std::size_t n_above;
};

inline std::optional<BruteMde> brute_force_mde(const std::vector<pairtest::CorpusPoint>& corpus,
                                               double target_rate) {
  std::optional<BruteMde> best;
  for (const auto& candidate : corpus) {
    const double d = candidate.abs_diff;
    std::size_t n = 0;
    std::size_t sig = 0;
    for (const auto& p : corpus) {
      if (p.abs_diff >= d) {
        ++n;
        if (p.significant) ++sig;
      }
    }
    if (static_cast<double>(sig) / static_cast<double>(n) >= target_rate) {
      if (!best || d < best->mde) best = BruteMde{d, n};
    }
  }
  return best;
}

}  // namespace oracles
