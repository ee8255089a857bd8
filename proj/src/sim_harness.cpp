#include "pairtest/sim_harness.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>

#include <json.hpp>

#include "pairtest/error.hpp"
#include "pairtest/math.hpp"
#include "pairtest/parallel.hpp"

namespace pairtest {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

BootstrapSampler::BootstrapSampler(const ComparisonData& source) : source_(&source) {
  if (source.scores_a.empty() || source.scores_b.empty()) {
    fail("bootstrap sampler: comparison " + source.comparison_id + " has an empty pool");
  }
}

double BootstrapSampler::draw(System system, RandomStream& rng) {
  const auto& pool = source_->scores(system);
  (system == System::A ? drawn_a_ : drawn_b_) += 1;
  return pool[rng.below(pool.size())];
}

std::uint64_t plan_schedule_fingerprint(const SequentialPlan& plan) {
  std::uint64_t h = combine_seed(plan.total_budget, static_cast<std::uint64_t>(plan.peeks));
  return combine_seed(h, std::bit_cast<std::uint64_t>(plan.alpha));
}

BenchmarkReport benchmark(std::span<const ComparisonData> corpus,
                          std::span<const SequentialPlan> plans, std::uint64_t reps,
                          std::uint64_t master_seed, unsigned workers) {
  if (corpus.empty()) fail("benchmark: empty corpus");
  if (plans.empty()) fail("benchmark: no plans given");
  if (reps < 1) fail("benchmark: need at least one repetition");

  BenchmarkReport report;
  report.master_seed = master_seed;
  report.reps = reps;
  report.plans.assign(plans.begin(), plans.end());
  report.comparisons.reserve(corpus.size());
  for (const auto& c : corpus) {
    SummaryStats s = summarize(c);  // also rejects empty pools
    report.comparisons.push_back(
        {c.comparison_id, c.language_pair, s.diff, s.n_a, s.n_b});
  }

  const std::size_t n_cells = corpus.size() * plans.size();
  report.cells.resize(n_cells);
  parallel_for(n_cells, workers, [&](std::size_t cell) {
    const std::size_t ci = cell / plans.size();
    const std::size_t pi = cell % plans.size();
    const ComparisonData& comparison = corpus[ci];
    const SequentialPlan& plan = plans[pi];
    const std::uint64_t cell_seed = combine_seed(
        combine_seed(master_seed, fnv1a(comparison.comparison_id)),
        plan_schedule_fingerprint(plan));

    std::uint64_t significant = 0;
    double spent_sum = 0.0;
    for (std::uint64_t r = 0; r < reps; ++r) {
      RandomStream rng(combine_seed(cell_seed, r));
      BootstrapSampler sampler(comparison);
      ProcedureResult result = run_procedure(plan, sampler, rng);
      if (result.significant) ++significant;
      spent_sum += static_cast<double>(result.judgments_spent);
    }
    report.cells[cell] = {ci, pi,
                          static_cast<double>(significant) / static_cast<double>(reps),
                          spent_sum / static_cast<double>(reps)};
  });
  return report;
}

std::vector<CurvePoint> power_curve(std::span<const ComparisonData> corpus, PlanKind kind,
                                    std::span<const std::uint64_t> budgets, int peeks,
                                    double alpha, std::optional<double> futility_p,
                                    std::uint64_t reps, std::uint64_t master_seed,
                                    unsigned workers) {
  if (budgets.empty()) fail("power_curve: no budgets given");
  for (std::size_t i = 1; i < budgets.size(); ++i) {
    if (budgets[i] <= budgets[i - 1]) fail("power_curve: budgets must be strictly increasing");
  }

  std::vector<CurvePoint> curve;
  curve.reserve(budgets.size());
  for (std::uint64_t budget : budgets) {
    const int k = kind == PlanKind::Fixed ? 1 : peeks;
    SequentialPlan plan = make_plan(kind, budget, k, alpha,
                                    kind == PlanKind::InterimFutility
                                        ? std::optional<double>(futility_p.value_or(0.5))
                                        : std::nullopt);
    BenchmarkReport report = benchmark(corpus, std::span(&plan, 1), reps, master_seed, workers);
    double power_sum = 0.0;
    double spend_sum = 0.0;
    for (const auto& cell : report.cells) {
      power_sum += cell.power;
      spend_sum += cell.avg_spent;
    }
    const double n = static_cast<double>(report.comparisons.size());
    curve.push_back({budget, power_sum / n, spend_sum / n});
  }
  return curve;
}

std::vector<double> isotonic_non_decreasing(std::span<const double> xs) {
  struct Block {
    double sum;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(xs.size());
  for (double x : xs) {
    blocks.push_back({x, 1});
    while (blocks.size() > 1) {
      const Block& last = blocks.back();
      const Block& prev = blocks[blocks.size() - 2];
      if (prev.sum * static_cast<double>(last.count) <=
          last.sum * static_cast<double>(prev.count)) {
        break;
      }
      Block merged{prev.sum + last.sum, prev.count + last.count};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> out;
  out.reserve(xs.size());
  for (const Block& b : blocks) {
    const double level = b.sum / static_cast<double>(b.count);
    out.insert(out.end(), b.count, level);
  }
  return out;
}

SavingsResult savings_at_equal_power(const CurvePoint& reference,
                                     std::span<const CurvePoint> alternative) {
  if (alternative.empty()) fail("savings_at_equal_power: empty alternative curve");
  for (std::size_t i = 1; i < alternative.size(); ++i) {
    if (alternative[i].planned_budget <= alternative[i - 1].planned_budget) {
      fail("savings_at_equal_power: alternative budgets must be strictly increasing");
    }
  }

  std::vector<double> raw_power(alternative.size());
  for (std::size_t i = 0; i < alternative.size(); ++i) raw_power[i] = alternative[i].mean_power;
  const std::vector<double> power = isotonic_non_decreasing(raw_power);

  const double level = reference.mean_power;
  if (level < power.front() || level > power.back()) {
    fail("savings_at_equal_power: curves do not cross this power level");
  }

  double alt_spend = alternative.front().mean_spend;
  if (level > power.front()) {
    for (std::size_t i = 0; i + 1 < power.size(); ++i) {
      if (level > power[i + 1]) continue;
      const double rise = power[i + 1] - power[i];
      // Flat (pooled) segments take the cheaper left end.
      const double t = rise > 0.0 ? (level - power[i]) / rise : 0.0;
      alt_spend = alternative[i].mean_spend +
                  t * (alternative[i + 1].mean_spend - alternative[i].mean_spend);
      break;
    }
  }

  SavingsResult result;
  result.power_level = level;
  result.ref_spend = reference.mean_spend;
  result.alt_spend = alt_spend;
  result.savings_fraction = 1.0 - alt_spend / reference.mean_spend;
  return result;
}

SavingsResult savings_at_equal_power(std::span<const CurvePoint> reference_curve,
                                     std::uint64_t reference_budget,
                                     std::span<const CurvePoint> alternative) {
  for (const auto& point : reference_curve) {
    if (point.planned_budget == reference_budget) {
      return savings_at_equal_power(point, alternative);
    }
  }
  fail("savings_at_equal_power: reference curve has no point at budget " +
       std::to_string(reference_budget));
}

std::vector<HistogramBin> difference_histogram(std::span<const ComparisonData> corpus,
                                               double bin_width) {
  if (!(bin_width > 0.0)) fail("difference_histogram: bin width must be positive");
  std::vector<std::uint64_t> counts;
  for (const auto& c : corpus) {
    const double d = std::fabs(c.observed_diff());
    const auto bin = static_cast<std::size_t>(d / bin_width);
    if (bin >= counts.size()) counts.resize(bin + 1, 0);
    ++counts[bin];
  }
  std::vector<HistogramBin> bins;
  bins.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    bins.push_back({static_cast<double>(i) * bin_width,
                    static_cast<double>(i + 1) * bin_width, counts[i]});
  }
  return bins;
}

std::string benchmark_report_json(const BenchmarkReport& report) {
  nlohmann::json j;
  j["master_seed"] = report.master_seed;
  j["reps"] = report.reps;
  j["plans"] = nlohmann::json::array();
  for (const auto& plan : report.plans) {
    j["plans"].push_back(nlohmann::json::parse(plan_to_json(plan)));
  }
  j["comparisons"] = nlohmann::json::array();
  for (std::size_t ci = 0; ci < report.comparisons.size(); ++ci) {
    const auto& comparison = report.comparisons[ci];
    nlohmann::json entry;
    entry["comparison_id"] = comparison.comparison_id;
    entry["language_pair"] = comparison.language_pair;
    entry["true_diff"] = comparison.true_diff;
    entry["n_a"] = comparison.n_a;
    entry["n_b"] = comparison.n_b;
    entry["cells"] = nlohmann::json::array();
    for (const auto& cell : report.cells) {
      if (cell.comparison_index != ci) continue;
      nlohmann::json c;
      c["plan"] = report.plans[cell.plan_index].label();
      c["budget"] = report.plans[cell.plan_index].total_budget;
      c["power"] = cell.power;
      c["avg_spent"] = cell.avg_spent;
      entry["cells"].push_back(c);
    }
    j["comparisons"].push_back(entry);
  }
  return j.dump(2) + "\n";
}

std::string benchmark_report_csv(const BenchmarkReport& report) {
  std::string out = "comparison_id,plan,budget,power,avg_spent,true_diff,reps,seed\n";
  for (const auto& cell : report.cells) {
    const auto& comparison = report.comparisons[cell.comparison_index];
    const auto& plan = report.plans[cell.plan_index];
    out += comparison.comparison_id;
    out += ',';
    out += plan.label();
    out += ',';
    out += std::to_string(plan.total_budget);
    out += ',';
    out += format_double(cell.power);
    out += ',';
    out += format_double(cell.avg_spent);
    out += ',';
    out += format_double(comparison.true_diff);
    out += ',';
    out += std::to_string(report.reps);
    out += ',';
    out += std::to_string(report.master_seed);
    out += '\n';
  }
  return out;
}

}  // namespace pairtest
