#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pairtest/error.hpp"
#include "pairtest/sim_harness.hpp"
#include "support/synthetic.hpp"

using namespace pairtest;

TEST_CASE("bootstrap draws stay uniform when oversampling far past the pool size") {
  ComparisonData c = synthetic::exact_diff_comparison("pool3", 0.0);
  c.scores_a = {10.0, 20.0, 30.0};
  BootstrapSampler sampler(c);
  RandomStream rng(42);
  const int draws = 30000;
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < draws; ++i) {
    const double x = sampler.draw(System::A, rng);
    ++counts[static_cast<int>(x / 10.0) - 1];
  }
  CHECK(sampler.drawn(System::A) == draws);
  CHECK(sampler.drawn(System::B) == 0);
  for (int count : counts) {
    CHECK(count > 9500);
    CHECK(count < 10500);
  }
}

TEST_CASE("bootstrap sampler rejects empty pools") {
  ComparisonData c;
  c.comparison_id = "broken";
  c.scores_a = {50.0};
  CHECK_THROWS_AS(BootstrapSampler{c}, Error);
}

TEST_CASE("fixed plans spend exactly the budget in every cell") {
  auto corpus = synthetic::mixture_corpus({.comparisons = 4, .pool_size = 80}, 1);
  auto plan = make_plan(PlanKind::Fixed, 160, 1);
  auto report = benchmark(corpus, std::span(&plan, 1), 50, 7);
  REQUIRE(report.cells.size() == 4);
  for (const auto& cell : report.cells) CHECK(cell.avg_spent == 160.0);
}

TEST_CASE("a null comparison benchmarks near the nominal level" * doctest::timeout(600)) {
  synthetic::MixtureSpec spec;
  spec.comparisons = 1;
  spec.pool_size = 600;
  spec.dense_fraction = 1.0;
  spec.dense_max = 0.0;  // identical models
  auto corpus = synthetic::mixture_corpus(spec, 3);
  // Make the pools literally identical so the true difference is zero.
  corpus[0].scores_b = corpus[0].scores_a;

  std::vector<SequentialPlan> plans{make_plan(PlanKind::Fixed, 1200, 1),
                                    make_plan(PlanKind::Interim, 1200, 3)};
  auto report = benchmark(corpus, plans, 1000, 99);
  CHECK(report.comparisons[0].true_diff == 0.0);
  for (const auto& cell : report.cells) {
    CHECK(cell.power == doctest::Approx(0.05).epsilon(0.4));  // 0.05 +- 0.02
    CHECK(std::fabs(cell.power - 0.05) <= 0.02);
  }
}

TEST_CASE("interim and interim-futility track each other on a large difference" *
          doctest::timeout(600)) {
  synthetic::MixtureSpec spec;
  spec.comparisons = 1;
  spec.pool_size = 600;
  spec.dense_fraction = 0.0;
  spec.dense_max = 10.0;
  spec.tail_max = 10.0;  // pin the difference at ten points
  auto corpus = synthetic::mixture_corpus(spec, 5);

  std::vector<SequentialPlan> plans{make_plan(PlanKind::Interim, 1200, 3),
                                    make_plan(PlanKind::InterimFutility, 1200, 3, 0.05, 0.5)};
  auto report = benchmark(corpus, plans, 1000, 99);
  const double interim_power = report.cells[0].power;
  const double futility_power = report.cells[1].power;
  CHECK(futility_power <= interim_power);
  CHECK(std::fabs(interim_power - futility_power) <= 0.05);
  CHECK(report.cells[1].avg_spent <= report.cells[0].avg_spent);
}

TEST_CASE("benchmark input validation") {
  auto corpus = synthetic::mixture_corpus({.comparisons = 2, .pool_size = 20}, 1);
  auto plan = make_plan(PlanKind::Fixed, 40, 1);
  CHECK_THROWS_AS(benchmark({}, std::span(&plan, 1), 10, 1), Error);
  CHECK_THROWS_AS(benchmark(corpus, {}, 10, 1), Error);
  CHECK_THROWS_AS(benchmark(corpus, std::span(&plan, 1), 0, 1), Error);
}

TEST_CASE("benchmark reports are identical for any worker count and stable under added plans") {
  auto corpus = synthetic::mixture_corpus({.comparisons = 5, .pool_size = 60}, 21);
  std::vector<SequentialPlan> one{make_plan(PlanKind::Interim, 120, 3)};
  std::vector<SequentialPlan> two{make_plan(PlanKind::Interim, 120, 3),
                                  make_plan(PlanKind::Fixed, 120, 1)};

  auto serial = benchmark(corpus, one, 200, 1234, 1);
  auto parallel = benchmark(corpus, one, 200, 1234, 4);
  REQUIRE(serial.cells.size() == parallel.cells.size());
  for (std::size_t i = 0; i < serial.cells.size(); ++i) {
    CHECK(serial.cells[i].power == parallel.cells[i].power);
    CHECK(serial.cells[i].avg_spent == parallel.cells[i].avg_spent);
  }
  CHECK(benchmark_report_csv(serial) == benchmark_report_csv(parallel));

  // Appending a plan must not perturb the original cells.
  auto extended = benchmark(corpus, two, 200, 1234, 2);
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    CHECK(extended.cells[c * 2].power == serial.cells[c].power);
    CHECK(extended.cells[c * 2].avg_spent == serial.cells[c].avg_spent);
  }
}

TEST_CASE("power curve grows with the budget and averages per-comparison powers" *
          doctest::timeout(600)) {
  synthetic::MixtureSpec spec;
  spec.comparisons = 3;
  spec.pool_size = 400;
  spec.dense_fraction = 0.0;
  spec.dense_max = 3.0;
  spec.tail_max = 3.0;  // moderate three-point differences
  auto corpus = synthetic::mixture_corpus(spec, 8);

  const std::vector<std::uint64_t> budgets{400, 1200, 3600};
  auto curve = power_curve(corpus, PlanKind::Fixed, budgets, 1, 0.05, std::nullopt, 400, 31);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].mean_power < curve[1].mean_power);
  CHECK(curve[1].mean_power < curve[2].mean_power);
  for (const auto& point : curve) CHECK(point.mean_spend == static_cast<double>(point.planned_budget));

  // The curve's mean equals the mean of the per-comparison cell powers.
  auto plan = make_plan(PlanKind::Fixed, 1200, 1);
  auto report = benchmark(corpus, std::span(&plan, 1), 400, 31);
  double sum = 0.0;
  for (const auto& cell : report.cells) sum += cell.power;
  CHECK(curve[1].mean_power == doctest::Approx(sum / 3.0).epsilon(1e-12));

  std::vector<std::uint64_t> bad{400, 400};
  CHECK_THROWS_AS(power_curve(corpus, PlanKind::Fixed, bad, 1, 0.05, std::nullopt, 400, 31),
                  Error);
}

TEST_CASE("equal-power savings: identical curves save nothing") {
  std::vector<CurvePoint> curve{{600, 0.4, 600.0}, {1000, 0.6, 1000.0}};
  auto s = savings_at_equal_power(curve, 1000, curve);
  CHECK(s.savings_fraction == doctest::Approx(0.0));
  CHECK(s.alt_spend == doctest::Approx(1000.0));
}

TEST_CASE("equal-power savings: hand-interpolated toy curves give 20%") {
  CurvePoint reference{1000, 0.5, 1000.0};
  std::vector<CurvePoint> alternative{{600, 0.4, 600.0}, {1000, 0.6, 1000.0}};
  auto s = savings_at_equal_power(reference, alternative);
  CHECK(s.power_level == 0.5);
  CHECK(s.alt_spend == doctest::Approx(800.0));
  CHECK(s.savings_fraction == doctest::Approx(0.2));
}

TEST_CASE("equal-power savings: levels outside the alternative curve are rejected") {
  std::vector<CurvePoint> alternative{{600, 0.4, 600.0}, {1000, 0.6, 1000.0}};
  CHECK_THROWS_WITH_AS(savings_at_equal_power({1200, 0.9, 1200.0}, alternative),
                       doctest::Contains("cross"), Error);
  CHECK_THROWS_AS(savings_at_equal_power({100, 0.1, 100.0}, alternative), Error);
  CHECK_THROWS_AS(savings_at_equal_power(std::span<const CurvePoint>(alternative), 555,
                                         std::span<const CurvePoint>(alternative)),
                  Error);
}

TEST_CASE("isotonic cleanup pools adjacent violators") {
  std::vector<double> wiggly{0.1, 0.3, 0.2, 0.5};
  auto fixed = isotonic_non_decreasing(wiggly);
  CHECK(fixed == std::vector<double>{0.1, 0.25, 0.25, 0.5});

  std::vector<double> sorted{0.1, 0.2, 0.9};
  CHECK(isotonic_non_decreasing(sorted) == sorted);

  std::vector<double> reversed{5.0, 1.0};
  CHECK(isotonic_non_decreasing(reversed) == std::vector<double>{3.0, 3.0});
}

TEST_CASE("difference histogram bins |true_diff| densely from zero") {
  std::vector<ComparisonData> corpus{synthetic::exact_diff_comparison("a", 0.2),
                                     synthetic::exact_diff_comparison("b", -0.4),
                                     synthetic::exact_diff_comparison("c", 3.0)};
  auto bins = difference_histogram(corpus, 1.0);
  REQUIRE(bins.size() == 4);
  CHECK(bins[0].count == 2);
  CHECK(bins[1].count == 0);
  CHECK(bins[2].count == 0);
  CHECK(bins[3].count == 1);
  CHECK(bins[3].lower == 3.0);
  CHECK(bins[3].upper == 4.0);

  CHECK_THROWS_AS(difference_histogram(corpus, 0.0), Error);
}

TEST_CASE("difference histogram matches its generating mixture") {
  RandomStream rng(2718);
  std::vector<ComparisonData> corpus;
  std::vector<double> diffs;
  for (int i = 0; i < 400; ++i) {
    const bool dense = rng.uniform() < 0.7;
    const double d = dense ? rng.uniform() * 1.5 : 1.5 + rng.uniform() * 8.5;
    diffs.push_back(d);
    corpus.push_back(synthetic::exact_diff_comparison("m" + std::to_string(i), d));
  }
  auto bins = difference_histogram(corpus, 1.5);

  // Manual binning of the declared mixture sample is the oracle.
  std::vector<std::uint64_t> expected(bins.size(), 0);
  for (double d : diffs) ++expected[static_cast<std::size_t>(d / 1.5)];
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    CHECK(bins[i].count == expected[i]);
    total += bins[i].count;
  }
  CHECK(total == corpus.size());
  // Dense mass sits in the first bin: 70% +- multinomial noise.
  CHECK(static_cast<double>(bins[0].count) / 400.0 == doctest::Approx(0.7).epsilon(0.12));
}

TEST_CASE("report serialization carries the flat schema") {
  auto corpus = synthetic::mixture_corpus({.comparisons = 2, .pool_size = 30}, 77);
  std::vector<SequentialPlan> plans{make_plan(PlanKind::InterimFutility, 60, 3, 0.05, 0.5)};
  auto report = benchmark(corpus, plans, 10, 4242);

  const std::string csv = benchmark_report_csv(report);
  CHECK(csv.rfind("comparison_id,plan,budget,power,avg_spent,true_diff,reps,seed\n", 0) == 0);
  CHECK(csv.find("syn0,interim-futility-k3,60,") != std::string::npos);
  CHECK(csv.find("4242") != std::string::npos);

  const std::string json_text = benchmark_report_json(report);
  CHECK(json_text.find("\"master_seed\": 4242") != std::string::npos);
  CHECK(json_text.find("\"interim-futility-k3\"") != std::string::npos);
  CHECK(json_text.find("\"true_diff\"") != std::string::npos);
}
