#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairtest/data_model.hpp"
#include "pairtest/sequential.hpp"

namespace pairtest {

/// Judgment source that draws uniformly with replacement from one
/// comparison's pools; oversampling beyond the pool size stays uniform.
class BootstrapSampler : public JudgmentSource {
 public:
  explicit BootstrapSampler(const ComparisonData& source);
  double draw(System system, RandomStream& rng) override;
  std::uint64_t drawn(System system) const {
    return system == System::A ? drawn_a_ : drawn_b_;
  }

 private:
  const ComparisonData* source_;
  std::uint64_t drawn_a_ = 0;
  std::uint64_t drawn_b_ = 0;
};

struct BenchmarkComparison {
  std::string comparison_id;
  std::string language_pair;
  double true_diff = 0.0;  // source-pool mean difference, treated as ground truth
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

struct BenchmarkCell {
  std::size_t comparison_index = 0;
  std::size_t plan_index = 0;
  double power = 0.0;      // significant fraction over reps
  double avg_spent = 0.0;  // mean judgments consumed
};

struct BenchmarkReport {
  std::uint64_t master_seed = 0;
  std::uint64_t reps = 0;
  std::vector<SequentialPlan> plans;
  std::vector<BenchmarkComparison> comparisons;
  std::vector<BenchmarkCell> cells;  // comparison-major, plan-minor order
};

/// Mixes the sampling schedule (budget, peeks, alpha) of a plan into seed
/// derivation. The stopping rules (kind, futility) are deliberately left
/// out: procedures that share a schedule replay identical draw streams, so
/// orderings like power(interim-futility) <= power(interim) hold per path
/// rather than only in expectation.
std::uint64_t plan_schedule_fingerprint(const SequentialPlan& plan);

/// Benchmarks every plan against every comparison: reps independent
/// procedure runs per cell, each replicate on a stream derived from
/// (master_seed, comparison_id, schedule, replicate). Results are
/// bit-identical for any worker count, and adding plans or comparisons
/// never perturbs existing cells.
BenchmarkReport benchmark(std::span<const ComparisonData> corpus,
                          std::span<const SequentialPlan> plans, std::uint64_t reps,
                          std::uint64_t master_seed, unsigned workers = 0);

struct CurvePoint {
  std::uint64_t planned_budget = 0;
  double mean_power = 0.0;  // unweighted average over comparisons
  double mean_spend = 0.0;
};

/// One benchmark per budget for a single plan kind; budgets must be
/// strictly increasing. peeks is forced to 1 for fixed plans.
std::vector<CurvePoint> power_curve(std::span<const ComparisonData> corpus, PlanKind kind,
                                    std::span<const std::uint64_t> budgets, int peeks,
                                    double alpha, std::optional<double> futility_p,
                                    std::uint64_t reps, std::uint64_t master_seed,
                                    unsigned workers = 0);

struct SavingsResult {
  double power_level = 0.0;
  double ref_spend = 0.0;
  double alt_spend = 0.0;
  double savings_fraction = 0.0;  // 1 - alt_spend / ref_spend
};

/// Budget needed by the alternative procedure to match the reference
/// point's power, by linear interpolation of the alternative spend-vs-power
/// curve (power made non-decreasing by isotonic cleanup first). Spends are
/// actual mean spends, not planned budgets. Errors when the reference power
/// lies outside the alternative curve's range.
SavingsResult savings_at_equal_power(const CurvePoint& reference,
                                     std::span<const CurvePoint> alternative);
// Convenience: picks the reference point by planned budget.
SavingsResult savings_at_equal_power(std::span<const CurvePoint> reference_curve,
                                     std::uint64_t reference_budget,
                                     std::span<const CurvePoint> alternative);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::uint64_t count = 0;
};

// Histogram of |true_diff| over the corpus with the given bin width;
// bins are [k w, (k+1) w), densely listed from zero to the largest diff.
std::vector<HistogramBin> difference_histogram(std::span<const ComparisonData> corpus,
                                               double bin_width);

// Pool-adjacent-violators projection onto non-decreasing sequences.
std::vector<double> isotonic_non_decreasing(std::span<const double> xs);

// Serialization for plotting and downstream tools.
std::string benchmark_report_json(const BenchmarkReport& report);
// Flat CSV: comparison_id,plan,budget,power,avg_spent,true_diff,reps,seed.
std::string benchmark_report_csv(const BenchmarkReport& report);

}  // namespace pairtest
