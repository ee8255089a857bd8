#include "pairtest/sequential.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "pairtest/error.hpp"
#include "pairtest/math.hpp"
#include "pairtest/parallel.hpp"
#include "pairtest/rank_stats.hpp"

namespace pairtest {

namespace {

// Nominal two-sided per-look levels at alpha = 0.05, frozen from
// pocock_per_look_alpha_mc at 1e8 paths (seed 0x706f636f636b).
struct PocockEntry {
  int peeks;
  double per_look;
};
constexpr PocockEntry kPocockTable[] = {
    {2, 0.02941},
    {3, 0.02206},
    {4, 0.01821},
    {5, 0.01581},
};

// Simulates max_i |Z_i| over K correlated looks for reps paths. Paths are
// generated in fixed chunks with per-chunk derived streams, so the result
// is identical for any worker count.
std::vector<double> simulate_peek_maxima(int peeks, std::uint64_t reps, std::uint64_t seed,
                                         unsigned workers) {
  constexpr std::uint64_t kChunk = 8192;
  std::vector<double> maxima(reps);
  const std::uint64_t n_chunks = (reps + kChunk - 1) / kChunk;
  parallel_for(n_chunks, workers, [&](std::size_t chunk) {
    RandomStream rng(combine_seed(seed, chunk));
    const std::uint64_t begin = chunk * kChunk;
    const std::uint64_t end = std::min(begin + kChunk, reps);
    for (std::uint64_t r = begin; r < end; ++r) {
      double sum = 0.0;
      double max_abs = 0.0;
      for (int i = 1; i <= peeks; ++i) {
        sum += rng.normal();
        max_abs = std::max(max_abs, std::fabs(sum) / std::sqrt(static_cast<double>(i)));
      }
      maxima[r] = max_abs;
    }
  });
  return maxima;
}

void check_peek_args(int peeks, double alpha) {
  if (peeks < 1) fail("peek count must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie strictly in (0,1)");
}

}  // namespace

std::string to_string(PlanKind kind) {
  switch (kind) {
    case PlanKind::Fixed:
      return "fixed";
    case PlanKind::Interim:
      return "interim";
    case PlanKind::InterimFutility:
      return "interim-futility";
  }
  fail("unknown plan kind");
}

PlanKind plan_kind_from_string(std::string_view text) {
  if (text == "fixed") return PlanKind::Fixed;
  if (text == "interim") return PlanKind::Interim;
  if (text == "interim-futility") return PlanKind::InterimFutility;
  fail("unknown plan kind: '" + std::string(text) + "' (expected fixed, interim or interim-futility)");
}

std::string to_string(PeekAction action) {
  switch (action) {
    case PeekAction::Continue:
      return "continue";
    case PeekAction::StopSignificant:
      return "stop-significant";
    case PeekAction::StopFutile:
      return "stop-futile";
    case PeekAction::ExhaustedNotSignificant:
      return "exhausted-not-significant";
  }
  fail("unknown peek action");
}

std::uint64_t SequentialPlan::batch_a(int batch_index) const {
  return (batch_sizes.at(static_cast<std::size_t>(batch_index)) + 1) / 2;
}

std::uint64_t SequentialPlan::batch_b(int batch_index) const {
  return batch_sizes.at(static_cast<std::size_t>(batch_index)) / 2;
}

std::uint64_t SequentialPlan::cumulative_a(int through_peek) const {
  std::uint64_t total = 0;
  for (int i = 0; i < through_peek; ++i) total += batch_a(i);
  return total;
}

std::uint64_t SequentialPlan::cumulative_b(int through_peek) const {
  std::uint64_t total = 0;
  for (int i = 0; i < through_peek; ++i) total += batch_b(i);
  return total;
}

std::string SequentialPlan::label() const {
  if (kind == PlanKind::Fixed) return "fixed";
  return to_string(kind) + "-k" + std::to_string(peeks);
}

double pocock_per_look_alpha_mc(int peeks, double alpha, std::uint64_t reps,
                                std::uint64_t seed, unsigned workers) {
  check_peek_args(peeks, alpha);
  if (reps < 1000) fail("pocock_per_look_alpha_mc: need at least 1000 reps");

  std::vector<double> maxima = simulate_peek_maxima(peeks, reps, seed, workers);
  // Empirical (1 - alpha) quantile of max |Z_i| solves P(max >= c) = alpha.
  auto quantile_at = maxima.begin() +
                     static_cast<std::ptrdiff_t>(std::llround((1.0 - alpha) * static_cast<double>(reps)));
  if (quantile_at >= maxima.end()) quantile_at = maxima.end() - 1;
  std::nth_element(maxima.begin(), quantile_at, maxima.end());
  const double boundary = *quantile_at;
  return 2.0 * normal_sf(boundary);
}

double pocock_per_look_alpha(int peeks, double alpha, std::uint64_t reps, std::uint64_t seed) {
  check_peek_args(peeks, alpha);
  if (peeks == 1) return alpha;
  if (alpha == 0.05) {
    for (const auto& entry : kPocockTable) {
      if (entry.peeks == peeks) return entry.per_look;
    }
  }
  return pocock_per_look_alpha_mc(peeks, alpha, reps, seed);
}

double naive_peeking_fpr(int peeks, double alpha, std::uint64_t reps, std::uint64_t seed,
                         unsigned workers) {
  check_peek_args(peeks, alpha);
  if (reps < 1000) fail("naive_peeking_fpr: need at least 1000 reps");
  const double z_crit = normal_quantile(1.0 - alpha / 2.0);
  std::vector<double> maxima = simulate_peek_maxima(peeks, reps, seed, workers);
  std::uint64_t hits = 0;
  for (double m : maxima) {
    if (m >= z_crit) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(reps);
}

double independent_tests_fpr(int tests, double alpha) {
  check_peek_args(tests, alpha);
  return 1.0 - std::pow(1.0 - alpha, tests);
}

SequentialPlan make_plan(PlanKind kind, std::uint64_t total_budget, int peeks, double alpha,
                         std::optional<double> futility_p, std::uint64_t pocock_reps,
                         std::uint64_t pocock_seed) {
  check_peek_args(peeks, alpha);
  if ((kind == PlanKind::Fixed) != (peeks == 1)) {
    fail("make_plan: fixed plans use exactly one peek; interim plans need at least two");
  }
  if (total_budget < 2 * static_cast<std::uint64_t>(peeks)) {
    fail("make_plan: budget must allow at least one judgment per system per batch");
  }
  if (futility_p.has_value() && kind != PlanKind::InterimFutility) {
    fail("make_plan: futility threshold only applies to interim-futility plans");
  }

  SequentialPlan plan;
  plan.kind = kind;
  plan.total_budget = total_budget;
  plan.peeks = peeks;
  plan.alpha = alpha;
  plan.per_look_alpha = pocock_per_look_alpha(peeks, alpha, pocock_reps, pocock_seed);
  if (kind == PlanKind::InterimFutility) {
    double f = futility_p.value_or(0.5);
    if (!(f > 0.0 && f < 1.0)) fail("make_plan: futility threshold must lie in (0,1)");
    plan.futility_p = f;
  }

  const std::uint64_t base = total_budget / static_cast<std::uint64_t>(peeks);
  const std::uint64_t remainder = total_budget % static_cast<std::uint64_t>(peeks);
  plan.batch_sizes.resize(static_cast<std::size_t>(peeks));
  for (std::size_t i = 0; i < plan.batch_sizes.size(); ++i) {
    plan.batch_sizes[i] = base + (i < remainder ? 1 : 0);
  }
  return plan;
}

PeekDecision evaluate_peek(const SequentialPlan& plan, std::span<const double> accumulated_a,
                           std::span<const double> accumulated_b, int peek_index) {
  if (peek_index < 1 || peek_index > plan.peeks) {
    fail("evaluate_peek: peek index " + std::to_string(peek_index) + " outside [1, " +
         std::to_string(plan.peeks) + "]");
  }
  const std::uint64_t want_a = plan.cumulative_a(peek_index);
  const std::uint64_t want_b = plan.cumulative_b(peek_index);
  if (accumulated_a.size() != want_a || accumulated_b.size() != want_b) {
    fail("evaluate_peek: pools (" + std::to_string(accumulated_a.size()) + ", " +
         std::to_string(accumulated_b.size()) + ") do not match the schedule through peek " +
         std::to_string(peek_index) + " (" + std::to_string(want_a) + ", " +
         std::to_string(want_b) + ")");
  }

  PeekDecision decision;
  decision.peek_index = peek_index;
  decision.judgments_used = want_a + want_b;
  decision.p_value = rank_sum_test(accumulated_a, accumulated_b).p_two_sided;

  if (decision.p_value < plan.per_look_alpha) {
    decision.action = PeekAction::StopSignificant;
  } else if (plan.kind == PlanKind::InterimFutility && peek_index < plan.peeks &&
             decision.p_value > *plan.futility_p) {
    // Strict comparison: p equal to the threshold continues.
    decision.action = PeekAction::StopFutile;
  } else if (peek_index == plan.peeks) {
    decision.action = PeekAction::ExhaustedNotSignificant;
  } else {
    decision.action = PeekAction::Continue;
  }
  return decision;
}

double SequenceSource::draw(System system, RandomStream&) {
  if (system == System::A) {
    if (next_a_ >= pool_a_.size()) fail("judgment source exhausted for system A");
    return pool_a_[next_a_++];
  }
  if (next_b_ >= pool_b_.size()) fail("judgment source exhausted for system B");
  return pool_b_[next_b_++];
}

ProcedureResult run_procedure(const SequentialPlan& plan, JudgmentSource& source,
                              RandomStream& rng) {
  std::vector<double> acc_a;
  std::vector<double> acc_b;
  acc_a.reserve(plan.cumulative_a(plan.peeks));
  acc_b.reserve(plan.cumulative_b(plan.peeks));

  ProcedureResult result;
  for (int peek = 1; peek <= plan.peeks; ++peek) {
    const std::uint64_t take_a = plan.batch_a(peek - 1);
    const std::uint64_t take_b = plan.batch_b(peek - 1);
    std::uint64_t got_a = 0;
    std::uint64_t got_b = 0;
    while (got_a < take_a || got_b < take_b) {
      // Alternate draws, system A first; trailing draws go to whichever
      // system still has budget in this batch.
      if (got_a < take_a && (got_a <= got_b || got_b == take_b)) {
        acc_a.push_back(source.draw(System::A, rng));
        ++got_a;
      } else {
        acc_b.push_back(source.draw(System::B, rng));
        ++got_b;
      }
    }

    const PeekDecision decision = evaluate_peek(plan, acc_a, acc_b, peek);
    result.stopped_at_peek = peek;
    result.judgments_spent = decision.judgments_used;
    result.final_p = decision.p_value;
    if (decision.action == PeekAction::StopSignificant) {
      result.significant = true;
      return result;
    }
    if (decision.action == PeekAction::StopFutile ||
        decision.action == PeekAction::ExhaustedNotSignificant) {
      return result;
    }
  }
  fail("run_procedure: schedule ended without a terminal decision");
}

std::string plan_to_json(const SequentialPlan& plan) {
  nlohmann::json j;
  j["kind"] = to_string(plan.kind);
  j["total_budget"] = plan.total_budget;
  j["peeks"] = plan.peeks;
  j["alpha"] = plan.alpha;
  j["per_look_alpha"] = plan.per_look_alpha;
  if (plan.futility_p.has_value()) {
    j["futility_p"] = *plan.futility_p;
  } else {
    j["futility_p"] = nullptr;
  }
  j["batch_sizes"] = plan.batch_sizes;
  return j.dump(2) + "\n";
}

SequentialPlan plan_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("plan JSON: ") + e.what());
  }
  SequentialPlan plan;
  try {
    plan.kind = plan_kind_from_string(j.at("kind").get<std::string>());
    plan.total_budget = j.at("total_budget").get<std::uint64_t>();
    plan.peeks = j.at("peeks").get<int>();
    plan.alpha = j.at("alpha").get<double>();
    plan.per_look_alpha = j.at("per_look_alpha").get<double>();
    if (j.contains("futility_p") && !j.at("futility_p").is_null()) {
      plan.futility_p = j.at("futility_p").get<double>();
    }
    plan.batch_sizes = j.at("batch_sizes").get<std::vector<std::uint64_t>>();
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("plan JSON: ") + e.what());
  }

  // Re-check the plan invariants rather than trusting the file.
  check_peek_args(plan.peeks, plan.alpha);
  if ((plan.kind == PlanKind::Fixed) != (plan.peeks == 1)) {
    fail("plan JSON: fixed plans use exactly one peek; interim plans need at least two");
  }
  if (plan.futility_p.has_value() != (plan.kind == PlanKind::InterimFutility)) {
    fail("plan JSON: futility_p must be set exactly for interim-futility plans");
  }
  if (plan.batch_sizes.size() != static_cast<std::size_t>(plan.peeks)) {
    fail("plan JSON: batch_sizes must list one entry per peek");
  }
  std::uint64_t sum = 0;
  std::uint64_t lo = plan.batch_sizes[0];
  std::uint64_t hi = plan.batch_sizes[0];
  for (std::uint64_t b : plan.batch_sizes) {
    if (b < 2) fail("plan JSON: each batch needs at least one judgment per system");
    sum += b;
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  if (sum != plan.total_budget) fail("plan JSON: batch_sizes must sum to total_budget");
  if (hi - lo > 1) fail("plan JSON: batch sizes may differ by at most one judgment");
  if (plan.peeks == 1 && plan.per_look_alpha != plan.alpha) {
    fail("plan JSON: a single-peek plan must test at alpha");
  }
  if (plan.peeks > 1 && !(plan.per_look_alpha < plan.alpha)) {
    fail("plan JSON: per_look_alpha must be strictly below alpha for multiple peeks");
  }
  return plan;
}

}  // namespace pairtest
