#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pairtest/data_model.hpp"
#include "pairtest/rng.hpp"

namespace pairtest {

enum class PlanKind { Fixed, Interim, InterimFutility };

std::string to_string(PlanKind kind);
PlanKind plan_kind_from_string(std::string_view text);

/// A testing procedure definition. total_budget counts judgments across
/// BOTH systems; each batch is split evenly per system with system A
/// taking the extra judgment on odd batch sizes. per_look_alpha is the
/// Pocock-adjusted nominal two-sided threshold applied at every look.
struct SequentialPlan {
  PlanKind kind = PlanKind::Fixed;
  std::uint64_t total_budget = 0;
  int peeks = 1;  // K; K = 1 iff kind == Fixed
  double alpha = 0.05;
  double per_look_alpha = 0.05;
  std::optional<double> futility_p;           // set iff kind == InterimFutility
  std::vector<std::uint64_t> batch_sizes;     // combined per batch, sums to total_budget

  std::uint64_t batch_a(int batch_index) const;  // system A share (ceil)
  std::uint64_t batch_b(int batch_index) const;
  std::uint64_t cumulative_a(int through_peek) const;
  std::uint64_t cumulative_b(int through_peek) const;
  std::string label() const;  // e.g. "fixed", "interim-k3", "interim-futility-k3"
};

enum class PeekAction { Continue, StopSignificant, StopFutile, ExhaustedNotSignificant };

std::string to_string(PeekAction action);

struct PeekDecision {
  PeekAction action = PeekAction::Continue;
  double p_value = 1.0;
  int peek_index = 0;
  std::uint64_t judgments_used = 0;
};

struct ProcedureResult {
  bool significant = false;
  int stopped_at_peek = 0;
  std::uint64_t judgments_spent = 0;
  double final_p = 1.0;
};

/// Two-sided Pocock nominal per-look threshold alpha_0 for K equally
/// spaced looks at overall level alpha. K = 1 returns alpha exactly and
/// K <= 5 at alpha = 0.05 is served from a Monte Carlo verified table;
/// anything else runs the Monte Carlo search (see pocock_per_look_alpha_mc).
double pocock_per_look_alpha(int peeks, double alpha,
                             std::uint64_t reps = 10'000'000,
                             std::uint64_t seed = 0x706f636f636bULL);

/// Monte Carlo search: simulate standard normal increments xi_1..xi_K,
/// form Z_i = (xi_1 + .. + xi_i) / sqrt(i), take the empirical
/// (1 - alpha) quantile c of max_i |Z_i| (the solution of
/// P(max |Z_i| >= c) = alpha) and return 2 (1 - Phi(c)).
double pocock_per_look_alpha_mc(int peeks, double alpha, std::uint64_t reps,
                                std::uint64_t seed, unsigned workers = 0);

/// Overall false-positive rate when testing at uncorrected alpha at each
/// of K correlated looks (Monte Carlo); demonstrates peeking inflation.
double naive_peeking_fpr(int peeks, double alpha, std::uint64_t reps,
                         std::uint64_t seed, unsigned workers = 0);

// 1 - (1 - alpha)^K: the analytic inflation for K independent tests.
double independent_tests_fpr(int tests, double alpha);

/// Builds a plan: resolves the per-look threshold and the batch schedule
/// (equal split of total_budget over peeks, remainder to the earliest
/// batches). Fixed plans must use exactly one peek, interim plans at least
/// two, and interim-futility plans default to a futility threshold of 0.5.
SequentialPlan make_plan(PlanKind kind, std::uint64_t total_budget, int peeks,
                         double alpha = 0.05,
                         std::optional<double> futility_p = std::nullopt,
                         std::uint64_t pocock_reps = 10'000'000,
                         std::uint64_t pocock_seed = 0x706f636f636bULL);

/// Decision rule at one peek, on pools containing exactly the judgments
/// of batches 1..peek_index. Significance (p < per_look_alpha) is checked
/// first; then, for interim-futility plans at non-final peeks, futility
/// (p strictly greater than the futility threshold). The final peek
/// returns ExhaustedNotSignificant when not significant.
PeekDecision evaluate_peek(const SequentialPlan& plan, std::span<const double> accumulated_a,
                           std::span<const double> accumulated_b, int peek_index);

/// Supplies judgments one at a time during a procedure run. Implementations
/// throw Error when they cannot supply another judgment.
class JudgmentSource {
 public:
  virtual ~JudgmentSource() = default;
  virtual double draw(System system, RandomStream& rng) = 0;
};

/// Replays fixed pools in order; errors on exhaustion.
class SequenceSource : public JudgmentSource {
 public:
  SequenceSource(std::vector<double> pool_a, std::vector<double> pool_b)
      : pool_a_(std::move(pool_a)), pool_b_(std::move(pool_b)) {}
  double draw(System system, RandomStream& rng) override;

 private:
  std::vector<double> pool_a_;
  std::vector<double> pool_b_;
  std::size_t next_a_ = 0;
  std::size_t next_b_ = 0;
};

/// Runs the full procedure: collects batches (alternating draws, system A
/// first), evaluates each peek and stops per the decision rule. The result
/// records actual judgments spent and the p-value at the stopping peek.
ProcedureResult run_procedure(const SequentialPlan& plan, JudgmentSource& source,
                              RandomStream& rng);

// JSON round trip for the plan schema
// {kind, total_budget, peeks, alpha, per_look_alpha, futility_p, batch_sizes[]}.
std::string plan_to_json(const SequentialPlan& plan);
SequentialPlan plan_from_json(const std::string& json_text);

}  // namespace pairtest
