#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pairtest {

struct TestResult {
  double u_statistic = 0.0;  // U for pool A, in [0, n_a * n_b]
  double z = 0.0;            // standardized statistic
  double p_two_sided = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  bool tie_correction_applied = false;
};

/// Two-sided Mann-Whitney U test by normal approximation.
///
/// Ranks are assigned with mid-rank ties over the pooled sample;
/// U_A = R_A - n_a(n_a+1)/2, z = (U_A - n_a n_b / 2) / sigma_U with the
/// standard tie-corrected sigma_U and a half-step continuity correction,
/// and p = 2 (1 - Phi(|z|)). When every value across both pools is
/// identical sigma_U is zero and p is 1. Errors on an empty pool.
TestResult rank_sum_test(std::span<const double> a, std::span<const double> b);

/// Exact two-sided p-value by enumerating all choose(n_a+n_b, n_a)
/// assignments of the pooled, tie-aware rank multiset:
/// p = P(|U - n_a n_b / 2| >= |U_obs - n_a n_b / 2|).
/// Feasibility bound n_a + n_b <= 16; intended as a testing oracle for
/// rank_sum_test, independent of the normal approximation.
double exact_rank_sum_p(std::span<const double> a, std::span<const double> b);

/// Split of the judgment variance into annotator noise (expected
/// within-segment variance) and signal (variance of true segment quality).
struct VarianceDecomposition {
  double total = 0.0;            // signal + annotator_noise
  double annotator_noise = 0.0;  // E[Var(H(x) | x)] estimate
  double signal = 0.0;           // Var(E[H(x) | x]) estimate
  double reducible_fraction = 0.0;  // signal / total
  double pooled_total = 0.0;     // raw n-1 variance over all scores, for reference
};

/// Estimates the decomposition from one system's (segment_id, score) pairs.
/// annotator_noise is the unweighted mean, over segments with at least two
/// judgments, of the per-segment unbiased variances. signal is the sample
/// variance of segment means when segment sizes are balanced, otherwise
/// max(pooled_total - annotator_noise, 0). Requires at least two segments
/// and at least one segment with repeat judgments; errors when the total
/// variance is zero.
VarianceDecomposition variance_decomposition(
    std::span<const std::pair<std::string, double>> judgments);

struct EfficiencyInputs {
  double rho = 0.0;    // sentence-level Pearson correlation of the metric
  double gamma = 0.0;  // noise-to-signal variance ratio, >= 0
};

// Data efficiency of the control-variates estimator:
// DE = (1 + gamma) / (1 - rho^2 + gamma), always >= 1.
// Errors on rho^2 = 1 with gamma = 0 (noiseless perfect metric).
double data_efficiency(EfficiencyInputs in);

// gamma = (1 - r) / r for a reducible variance fraction r in (0,1).
double gamma_from_reducible(double reducible_fraction);

}  // namespace pairtest
