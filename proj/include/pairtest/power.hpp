#pragma once

#include <cstdint>
#include <span>

#include "pairtest/rng.hpp"
#include "pairtest/sequential.hpp"

namespace pairtest {

/// Judgment model s ~ 100 - Gamma(k, theta), fit by moment matching:
/// with mu_g = 100 - mean, k = mu_g^2 / variance and theta = variance / mu_g.
/// Samples never exceed 100 and the distribution is left-skewed; scores can
/// fall below 0 on the Gamma tail and are deliberately not clamped, since
/// clamping would distort the fitted variance and rank tests are unaffected
/// by monotone tail placement.
class GammaJudgmentModel {
 public:
  GammaJudgmentModel(double mean_score, double variance);

  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double shape() const { return shape_; }
  double scale() const { return scale_; }

  double sample(RandomStream& rng) const;

  // Same variance, mean moved by delta.
  GammaJudgmentModel shifted(double delta) const;

 private:
  double mean_;
  double variance_;
  double shape_;
  double scale_;
};

struct PowerEstimate {
  double power = 0.0;
  std::uint64_t reps = 0;
  double std_error = 0.0;  // binomial: sqrt(power (1 - power) / reps)
};

/// Simulated power of a fixed two-sided rank-sum test at level alpha with
/// total_n judgments split over the two systems (system A takes the extra
/// judgment when odd). Replicate r draws from streams derived from
/// (seed, r), so results are bit-identical for any worker count and sample
/// draws are prefix-shared across different total_n (common random numbers).
/// Requires total_n >= 4 and reps >= 100.
PowerEstimate estimate_power(const GammaJudgmentModel& model_a, const GammaJudgmentModel& model_b,
                             std::uint64_t total_n, double alpha, std::uint64_t reps,
                             std::uint64_t seed, unsigned workers = 0);

/// Smallest even total budget whose simulated power reaches target_power
/// for detecting a mean difference of delta (the comparison model is the
/// base model with its mean shifted down by delta, same variance).
/// Exponential bracketing followed by bisection under common random
/// numbers, with a confirmation pass at 4x reps; errors when the search
/// would exceed cap ("MDE unattainable within cap").
std::uint64_t required_sample_size(double delta, const GammaJudgmentModel& base_model,
                                   double target_power, double alpha, std::uint64_t reps,
                                   std::uint64_t seed, std::uint64_t cap = 1'000'000,
                                   unsigned workers = 0);

struct CorpusPoint {
  double abs_diff = 0.0;   // observed |mean(a) - mean(b)|
  bool significant = false;
};

struct MdeResult {
  double mde = 0.0;          // always one of the observed abs_diff values
  double target_rate = 0.0;
  std::size_t n_above = 0;   // comparisons with abs_diff >= mde
};

/// Observed minimum detectable effect: the smallest observed abs_diff d
/// such that the significant fraction among comparisons with abs_diff >= d
/// is at least target_rate. Errors when no threshold reaches the rate.
MdeResult observed_mde(std::span<const CorpusPoint> corpus, double target_rate);

// (1 - alpha)(1 - beta): probability a significant conclusion matches the
// true ordering.
double pairwise_accuracy(double alpha, double beta);

/// Judgment source drawing system A from one Gamma model and system B from
/// another; never exhausts.
class GammaPairSource : public JudgmentSource {
 public:
  GammaPairSource(GammaJudgmentModel model_a, GammaJudgmentModel model_b)
      : model_a_(model_a), model_b_(model_b) {}
  double draw(System system, RandomStream& rng) override {
    return system == System::A ? model_a_.sample(rng) : model_b_.sample(rng);
  }

 private:
  GammaJudgmentModel model_a_;
  GammaJudgmentModel model_b_;
};

}  // namespace pairtest
