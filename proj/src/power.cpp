#include "pairtest/power.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pairtest/error.hpp"
#include "pairtest/parallel.hpp"
#include "pairtest/rank_stats.hpp"

namespace pairtest {

GammaJudgmentModel::GammaJudgmentModel(double mean_score, double variance)
    : mean_(mean_score), variance_(variance) {
  if (!(mean_score > 0.0 && mean_score < 100.0)) {
    fail("gamma judgment model: mean must lie strictly in (0,100)");
  }
  if (!(variance >= 1e-6)) {
    fail("gamma judgment model: variance below 1e-6 is degenerate");
  }
  const double mu_g = 100.0 - mean_score;
  shape_ = mu_g * mu_g / variance;
  scale_ = variance / mu_g;
}

double GammaJudgmentModel::sample(RandomStream& rng) const {
  return 100.0 - rng.gamma(shape_, scale_);
}

GammaJudgmentModel GammaJudgmentModel::shifted(double delta) const {
  return GammaJudgmentModel(mean_ + delta, variance_);
}

namespace {

std::uint64_t even_floor(std::uint64_t n) { return n & ~std::uint64_t{1}; }

}  // namespace

PowerEstimate estimate_power(const GammaJudgmentModel& model_a, const GammaJudgmentModel& model_b,
                             std::uint64_t total_n, double alpha, std::uint64_t reps,
                             std::uint64_t seed, unsigned workers) {
  if (total_n < 4) fail("estimate_power: need at least 4 judgments (2 per system)");
  if (reps < 100) fail("estimate_power: need at least 100 repetitions");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("estimate_power: alpha must lie strictly in (0,1)");

  const std::uint64_t n_a = (total_n + 1) / 2;
  const std::uint64_t n_b = total_n / 2;
  std::vector<std::uint8_t> significant(reps, 0);

  parallel_for(reps, workers, [&](std::size_t r) {
    // Separate per-system streams keep draws prefix-shared across total_n.
    RandomStream stream_a(combine_seed(combine_seed(seed, r), 0));
    RandomStream stream_b(combine_seed(combine_seed(seed, r), 1));
    std::vector<double> a(n_a);
    std::vector<double> b(n_b);
    for (auto& x : a) x = model_a.sample(stream_a);
    for (auto& x : b) x = model_b.sample(stream_b);
    significant[r] = rank_sum_test(a, b).p_two_sided < alpha ? 1 : 0;
  });

  std::uint64_t hits = 0;
  for (std::uint8_t s : significant) hits += s;
  PowerEstimate est;
  est.reps = reps;
  est.power = static_cast<double>(hits) / static_cast<double>(reps);
  est.std_error = std::sqrt(est.power * (1.0 - est.power) / static_cast<double>(reps));
  return est;
}

std::uint64_t required_sample_size(double delta, const GammaJudgmentModel& base_model,
                                   double target_power, double alpha, std::uint64_t reps,
                                   std::uint64_t seed, std::uint64_t cap, unsigned workers) {
  if (!(delta > 0.0)) fail("required_sample_size: delta must be positive");
  if (!(target_power > 0.0 && target_power < 1.0)) {
    fail("required_sample_size: target power must lie strictly in (0,1)");
  }
  if (cap < 4) fail("required_sample_size: cap must allow at least 4 judgments");

  // The weaker system keeps the same variance with its mean delta lower;
  // shifting down avoids the 100-point ceiling on the stronger side.
  const GammaJudgmentModel model_b = base_model.shifted(-delta);
  auto power_at = [&](std::uint64_t n, std::uint64_t n_reps) {
    return estimate_power(base_model, model_b, n, alpha, n_reps, seed, workers).power;
  };

  // Exponential bracketing: double until the target power is reached.
  std::uint64_t lo = 2;  // power(lo) below target (or lo too small to test)
  std::uint64_t hi = 4;
  while (power_at(hi, reps) < target_power) {
    if (hi >= even_floor(cap)) {
      fail("required_sample_size: MDE unattainable within cap of " + std::to_string(cap) +
           " judgments");
    }
    lo = hi;
    hi = std::min(hi * 2, even_floor(cap));
  }

  // Bisection over even budgets; common random numbers keep the empirical
  // power curve monotone enough for the invariant power(hi) >= target.
  while (hi - lo > 2) {
    const std::uint64_t mid = even_floor(lo + (hi - lo) / 2);
    if (power_at(mid, reps) >= target_power) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  // Confirmation at 4x reps guards Monte Carlo flip-flops near the target.
  const std::uint64_t confirm_reps = reps * 4;
  while (power_at(hi, confirm_reps) < target_power) {
    const std::uint64_t step = std::max<std::uint64_t>(2, even_floor(hi / 50));
    if (hi >= even_floor(cap)) {
      fail("required_sample_size: MDE unattainable within cap of " + std::to_string(cap) +
           " judgments");
    }
    hi = std::min(hi + step, even_floor(cap));
  }
  return hi;
}

MdeResult observed_mde(std::span<const CorpusPoint> corpus, double target_rate) {
  if (corpus.empty()) fail("observed_mde: empty corpus");
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    fail("observed_mde: target rate must lie strictly in (0,1)");
  }

  std::vector<CorpusPoint> sorted(corpus.begin(), corpus.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const CorpusPoint& l, const CorpusPoint& r) { return l.abs_diff > r.abs_diff; });

  // Scan thresholds at each observed abs_diff from largest to smallest,
  // keeping the smallest one whose at-or-above set meets the rate.
  // Equal diffs enter together so the >= cut is respected.
  std::size_t n = 0;
  std::size_t n_significant = 0;
  bool found = false;
  double best_diff = 0.0;
  std::size_t best_n = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].abs_diff == sorted[i].abs_diff) ++j;
    for (std::size_t k = i; k < j; ++k) {
      ++n;
      if (sorted[k].significant) ++n_significant;
    }
    const double rate = static_cast<double>(n_significant) / static_cast<double>(n);
    if (rate >= target_rate) {
      found = true;
      best_diff = sorted[i].abs_diff;
      best_n = n;
    }
    i = j;
  }
  if (!found) fail("observed_mde: corpus never reaches the target significance rate");

  MdeResult result;
  result.mde = best_diff;
  result.target_rate = target_rate;
  result.n_above = best_n;
  return result;
}

double pairwise_accuracy(double alpha, double beta) {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0)) {
    fail("pairwise_accuracy: alpha and beta must lie in [0,1]");
  }
  return (1.0 - alpha) * (1.0 - beta);
}

}  // namespace pairtest
