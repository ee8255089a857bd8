// pairtest: pairwise system comparison toolkit on 0-100 human judgments.
// Subcommands cover judgment-file validation, observed-MDE reports, power
// analysis and sample sizing, live interim decisions, procedure
// benchmarking and control-variates efficiency prediction.

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pairtest/data_model.hpp"
#include "pairtest/error.hpp"
#include "pairtest/math.hpp"
#include "pairtest/power.hpp"
#include "pairtest/rank_stats.hpp"
#include "pairtest/rng.hpp"
#include "pairtest/sequential.hpp"
#include "pairtest/sim_harness.hpp"
#include "pairtest/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSignificant = 10;
constexpr int kExitFutile = 20;
constexpr int kExitExhausted = 30;

class UsageError : public pairtest::Error {
 public:
  using pairtest::Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) pairtest::fail(path + ": cannot open for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) pairtest::fail(path + ": cannot open for writing");
  out << content;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

json input_digest(const std::string& path) {
  json j;
  j["path"] = path;
  j["fnv1a64"] = hex64(pairtest::fnv1a(read_file(path)));
  return j;
}

json make_manifest(const std::string& command, const json& parameters,
                   const std::vector<std::string>& inputs,
                   std::optional<std::uint64_t> master_seed) {
  json m;
  m["command"] = command;
  m["parameters"] = parameters;
  if (master_seed.has_value()) m["master_seed"] = *master_seed;
  m["inputs"] = json::array();
  for (const auto& path : inputs) m["inputs"].push_back(input_digest(path));
  m["tool_version"] = pairtest::kVersion;
  m["timestamp"] = utc_timestamp();
  return m;
}

// Explicit seed or a generated one; generated seeds are always reported in
// the manifest so runs stay reproducible.
std::uint64_t resolve_seed(std::optional<std::uint64_t> seed_flag) {
  if (seed_flag.has_value()) return *seed_flag;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const std::string& input) {
  auto corpus = pairtest::load_judgments_file(input);
  std::size_t judgments = 0;
  for (const auto& c : corpus) {
    std::cout << c.comparison_id << "  " << c.language_pair << "  n_a=" << c.scores_a.size()
              << "  n_b=" << c.scores_b.size() << "\n";
    judgments += c.scores_a.size() + c.scores_b.size();
  }
  std::cout << corpus.size() << " comparisons, " << judgments << " judgments\n";
  auto problems = pairtest::validate_comparisons(corpus);
  for (const auto& p : problems) std::cerr << "error: " << p << "\n";
  return problems.empty() ? 0 : kExitError;
}

// ---------------------------------------------------------------------------
// mde

int cmd_mde(const std::string& input, double alpha, double target_rate, bool by_language,
            const std::string& out) {
  auto corpus = pairtest::load_judgments_file(input);
  auto problems = pairtest::validate_comparisons(corpus);
  if (!problems.empty()) pairtest::fail(problems.front());

  std::map<std::string, std::vector<pairtest::CorpusPoint>> groups;
  std::map<std::string, std::vector<double>> group_diffs;
  for (const auto& c : corpus) {
    const std::string key = by_language ? c.language_pair : "all";
    const double diff = std::fabs(c.observed_diff());
    const bool significant =
        pairtest::rank_sum_test(c.scores_a, c.scores_b).p_two_sided < alpha;
    groups[key].push_back({diff, significant});
    group_diffs[key].push_back(diff);
  }

  std::string csv = "group,comparisons,significant,insignificant,observed_mde,status,median_abs_diff\n";
  for (const auto& [key, points] : groups) {
    std::size_t significant = 0;
    for (const auto& p : points) significant += p.significant ? 1 : 0;

    std::vector<double> diffs = group_diffs[key];
    std::sort(diffs.begin(), diffs.end());
    const std::size_t n = diffs.size();
    const double median =
        n % 2 == 1 ? diffs[n / 2] : 0.5 * (diffs[n / 2 - 1] + diffs[n / 2]);

    std::string mde_text;
    std::string status = "ok";
    try {
      auto result = pairtest::observed_mde(points, target_rate);
      std::ostringstream v;
      v << result.mde;
      mde_text = v.str();
    } catch (const pairtest::Error&) {
      status = "unattained";
    }

    std::ostringstream row;
    row << key << ',' << points.size() << ',' << significant << ',' << points.size() - significant
        << ',' << mde_text << ',' << status << ',' << median << '\n';
    csv += row.str();
    std::cout << key << ": " << significant << "/" << points.size() - significant
              << " significant/insignificant, MDE "
              << (status == "ok" ? mde_text : std::string("unattained")) << ", median |diff| "
              << median << "\n";
  }

  if (!out.empty()) {
    write_file(out, csv);
    json params = {{"input", input},
                   {"alpha", alpha},
                   {"target_rate", target_rate},
                   {"by_language_pair", by_language}};
    write_file(out + ".manifest.json",
               make_manifest("mde", params, {input}, std::nullopt).dump(2) + "\n");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// samplesize

int cmd_samplesize(double delta, double mean_score, double variance, double alpha,
                   double accuracy, std::uint64_t reps, std::optional<std::uint64_t> seed_flag,
                   std::uint64_t cap, unsigned workers) {
  if (!(accuracy > 0.0 && accuracy < 1.0)) throw UsageError("accuracy must lie strictly in (0,1)");
  const double target_power = accuracy / (1.0 - alpha);
  if (!(target_power < 1.0)) {
    pairtest::fail("accuracy " + std::to_string(accuracy) + " is unattainable at alpha " +
                   std::to_string(alpha));
  }
  const std::uint64_t seed = resolve_seed(seed_flag);

  pairtest::GammaJudgmentModel base(mean_score, variance);
  const std::uint64_t total =
      pairtest::required_sample_size(delta, base, target_power, alpha, reps, seed, cap, workers);

  json params = {{"delta", delta},         {"mean", mean_score}, {"variance", variance},
                 {"alpha", alpha},         {"accuracy", accuracy}, {"target_power", target_power},
                 {"reps", reps},           {"cap", cap}};
  json out;
  out["manifest"] = make_manifest("samplesize", params, {}, seed);
  out["total_n"] = total;
  out["per_system"] = {{"a", (total + 1) / 2}, {"b", total / 2}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// power

int cmd_power(double mean_score, double variance, double delta, std::uint64_t total_n,
              double alpha, std::uint64_t reps, std::optional<std::uint64_t> seed_flag,
              unsigned workers) {
  const std::uint64_t seed = resolve_seed(seed_flag);
  pairtest::GammaJudgmentModel model_a(mean_score, variance);
  pairtest::GammaJudgmentModel model_b = model_a.shifted(-delta);
  auto estimate = pairtest::estimate_power(model_a, model_b, total_n, alpha, reps, seed, workers);

  json params = {{"mean", mean_score}, {"variance", variance}, {"delta", delta},
                 {"total_n", total_n}, {"alpha", alpha},       {"reps", reps}};
  json out;
  out["manifest"] = make_manifest("power", params, {}, seed);
  out["power"] = estimate.power;
  out["std_error"] = estimate.std_error;
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// decide

int cmd_decide(const std::string& plan_path, const std::string& kind_text, std::uint64_t budget,
               int peeks, double alpha, std::optional<double> futility_p,
               const std::string& input, int peek_index, const std::string& out) {
  pairtest::SequentialPlan plan;
  if (!plan_path.empty()) {
    plan = pairtest::plan_from_json(read_file(plan_path));
  } else {
    if (kind_text.empty() || budget == 0) {
      throw UsageError("decide needs either --plan or inline --kind and --budget");
    }
    const auto kind = pairtest::plan_kind_from_string(kind_text);
    plan = pairtest::make_plan(kind, budget, kind == pairtest::PlanKind::Fixed ? 1 : peeks,
                               alpha, futility_p);
  }

  auto corpus = pairtest::load_judgments_file(input);
  if (corpus.size() != 1) {
    pairtest::fail(input + ": expected judgments for exactly one comparison, found " +
                   std::to_string(corpus.size()));
  }
  const auto& c = corpus.front();
  const auto decision = pairtest::evaluate_peek(plan, c.scores_a, c.scores_b, peek_index);

  std::uint64_t next_batch = 0;
  if (decision.action == pairtest::PeekAction::Continue) {
    next_batch = plan.batch_sizes[static_cast<std::size_t>(peek_index)];
  }

  json record;
  record["action"] = pairtest::to_string(decision.action);
  record["p_value"] = decision.p_value;
  record["per_look_alpha"] = plan.per_look_alpha;
  record["peek_index"] = decision.peek_index;
  record["judgments_used"] = decision.judgments_used;
  record["next_batch_size"] = next_batch;
  record["plan"] = json::parse(pairtest::plan_to_json(plan));
  std::cout << record.dump(2) << "\n";

  if (!out.empty()) {
    write_file(out, record.dump(2) + "\n");
    json params = {{"input", input}, {"peek", peek_index}};
    std::vector<std::string> inputs = {input};
    if (!plan_path.empty()) inputs.push_back(plan_path);
    write_file(out + ".manifest.json",
               make_manifest("decide", params, inputs, std::nullopt).dump(2) + "\n");
  }

  switch (decision.action) {
    case pairtest::PeekAction::Continue:
      return 0;
    case pairtest::PeekAction::StopSignificant:
      return kExitSignificant;
    case pairtest::PeekAction::StopFutile:
      return kExitFutile;
    case pairtest::PeekAction::ExhaustedNotSignificant:
      return kExitExhausted;
  }
  return kExitError;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& input, std::vector<std::string> kinds,
                 std::vector<std::uint64_t> budgets, int peeks, double alpha, double futility_p,
                 std::uint64_t reps, std::optional<std::uint64_t> seed_flag,
                 const std::string& out_dir, unsigned workers, double split_threshold,
                 double bin_width) {
  if (kinds.empty()) kinds = {"fixed", "interim", "interim-futility"};
  if (budgets.empty()) budgets = {1200};
  std::sort(budgets.begin(), budgets.end());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());
  const std::uint64_t seed = resolve_seed(seed_flag);

  auto corpus = pairtest::load_judgments_file(input);
  auto problems = pairtest::validate_comparisons(corpus);
  if (!problems.empty()) pairtest::fail(problems.front());

  std::vector<pairtest::SequentialPlan> plans;
  for (const auto& kind_text : kinds) {
    const auto kind = pairtest::plan_kind_from_string(kind_text);
    for (std::uint64_t budget : budgets) {
      plans.push_back(pairtest::make_plan(
          kind, budget, kind == pairtest::PlanKind::Fixed ? 1 : peeks, alpha,
          kind == pairtest::PlanKind::InterimFutility ? std::optional<double>(futility_p)
                                                      : std::nullopt));
    }
  }

  const auto report = pairtest::benchmark(corpus, plans, reps, seed, workers);

  // Per-plan power and spend over the small/large difference split.
  std::string splits = "split,plan,budget,comparisons,mean_power,mean_spent\n";
  for (std::size_t pi = 0; pi < plans.size(); ++pi) {
    for (const bool small : {true, false}) {
      double power_sum = 0.0;
      double spend_sum = 0.0;
      std::size_t n = 0;
      for (const auto& cell : report.cells) {
        if (cell.plan_index != pi) continue;
        const double d = std::fabs(report.comparisons[cell.comparison_index].true_diff);
        if ((d < split_threshold) != small) continue;
        power_sum += cell.power;
        spend_sum += cell.avg_spent;
        ++n;
      }
      std::ostringstream row;
      row << (small ? "small" : "large") << ',' << plans[pi].label() << ','
          << plans[pi].total_budget << ',' << n << ',';
      if (n > 0) {
        row << power_sum / static_cast<double>(n) << ',' << spend_sum / static_cast<double>(n);
      } else {
        row << ',';
      }
      row << '\n';
      splits += row.str();
    }
  }

  std::string histogram = "bin_lower,bin_upper,count\n";
  for (const auto& bin : pairtest::difference_histogram(corpus, bin_width)) {
    std::ostringstream row;
    row << bin.lower << ',' << bin.upper << ',' << bin.count << '\n';
    histogram += row.str();
  }

  std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  write_file(path("report.json"), pairtest::benchmark_report_json(report));
  write_file(path("report.csv"), pairtest::benchmark_report_csv(report));
  write_file(path("splits.csv"), splits);
  write_file(path("histogram.csv"), histogram);

  json params = {{"input", input},
                 {"kinds", kinds},
                 {"budgets", budgets},
                 {"peeks", peeks},
                 {"alpha", alpha},
                 {"futility_p", futility_p},
                 {"reps", reps},
                 {"split_threshold", split_threshold},
                 {"bin_width", bin_width}};
  write_file(path("manifest.json"), make_manifest("simulate", params, {input}, seed).dump(2) + "\n");

  std::cout << "seed " << seed << "; " << report.comparisons.size() << " comparisons x "
            << plans.size() << " plans x " << reps << " reps\n";
  std::cout << "wrote " << path("report.json") << ", report.csv, splits.csv, histogram.csv, manifest.json\n";
  return 0;
}

// ---------------------------------------------------------------------------
// de

int cmd_de(double rho, std::optional<double> reducible, std::optional<double> gamma_flag) {
  if (reducible.has_value() == gamma_flag.has_value()) {
    throw UsageError("de needs exactly one of --reducible or --gamma");
  }
  const double gamma =
      gamma_flag.has_value() ? *gamma_flag : pairtest::gamma_from_reducible(*reducible);
  const double de = pairtest::data_efficiency({rho, gamma});
  std::cout << "gamma: " << gamma << "\n";
  std::cout << "data_efficiency: " << de << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// plan

int cmd_plan(const std::string& kind_text, std::uint64_t budget, int peeks, double alpha,
             std::optional<double> futility_p, const std::string& out) {
  const auto kind = pairtest::plan_kind_from_string(kind_text);
  const auto plan = pairtest::make_plan(kind, budget, kind == pairtest::PlanKind::Fixed ? 1 : peeks,
                                        alpha, futility_p);
  const std::string text = pairtest::plan_to_json(plan);
  std::cout << text;
  if (!out.empty()) write_file(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairwise system comparison toolkit (0-100 human judgments)"};
  app.require_subcommand(1);

  // validate
  std::string v_input;
  auto* validate = app.add_subcommand("validate", "check a judgment file and list pool sizes");
  validate->add_option("--input", v_input, "judgment CSV file")->required();

  // mde
  std::string m_input, m_out;
  double m_alpha = 0.05, m_rate = 0.95;
  bool m_by_language = false;
  auto* mde = app.add_subcommand("mde", "observed minimum detectable effects over a corpus");
  mde->add_option("--input", m_input, "judgment CSV file")->required();
  mde->add_option("--alpha", m_alpha, "two-sided significance level");
  mde->add_option("--target-rate", m_rate, "required significant fraction at/above the MDE");
  mde->add_flag("--by-language-pair", m_by_language, "group rows by language pair");
  mde->add_option("--out", m_out, "write the table as CSV");

  // samplesize
  double s_delta = 0.0, s_mean = 0.0, s_variance = 0.0, s_alpha = 0.05, s_accuracy = 0.9;
  std::uint64_t s_reps = 1000, s_cap = 1'000'000;
  std::optional<std::uint64_t> s_seed;
  unsigned s_workers = 0;
  auto* samplesize =
      app.add_subcommand("samplesize", "judgments needed to detect a difference by simulation");
  samplesize->add_option("--delta", s_delta, "true mean difference in DA points")->required();
  samplesize->add_option("--mean", s_mean, "mean judgment score of the base system")->required();
  samplesize->add_option("--variance", s_variance, "judgment variance")->required();
  samplesize->add_option("--alpha", s_alpha, "two-sided significance level");
  samplesize->add_option("--accuracy", s_accuracy, "target pairwise accuracy (1-alpha)(1-beta)");
  samplesize->add_option("--reps", s_reps, "simulation repetitions per evaluated budget");
  samplesize->add_option("--seed", s_seed, "random seed");
  samplesize->add_option("--cap", s_cap, "largest budget the search may try");
  samplesize->add_option("--workers", s_workers, "worker threads (0 = hardware)");

  // power
  double p_mean = 0.0, p_variance = 0.0, p_delta = 0.0, p_alpha = 0.05;
  std::uint64_t p_total = 0, p_reps = 1000;
  std::optional<std::uint64_t> p_seed;
  unsigned p_workers = 0;
  auto* power = app.add_subcommand("power", "simulated power of a fixed test");
  power->add_option("--mean", p_mean, "mean judgment score of the base system")->required();
  power->add_option("--variance", p_variance, "judgment variance")->required();
  power->add_option("--delta", p_delta, "true mean difference in DA points")->required();
  power->add_option("--total-n", p_total, "total judgments across both systems")->required();
  power->add_option("--alpha", p_alpha, "two-sided significance level");
  power->add_option("--reps", p_reps, "simulation repetitions");
  power->add_option("--seed", p_seed, "random seed");
  power->add_option("--workers", p_workers, "worker threads (0 = hardware)");

  // decide
  std::string d_plan, d_kind, d_input, d_out;
  std::uint64_t d_budget = 0;
  int d_peeks = 3, d_peek = 0;
  double d_alpha = 0.05;
  std::optional<double> d_futility;
  auto* decide = app.add_subcommand("decide", "evaluate one interim peek on accumulated judgments");
  decide->add_option("--plan", d_plan, "plan JSON file");
  decide->add_option("--kind", d_kind, "fixed, interim or interim-futility (inline plan)");
  decide->add_option("--budget", d_budget, "total judgment budget (inline plan)");
  decide->add_option("--peeks", d_peeks, "planned peeks (inline plan)");
  decide->add_option("--alpha", d_alpha, "two-sided significance level (inline plan)");
  decide->add_option("--futility-p", d_futility, "futility threshold (inline plan)");
  decide->add_option("--input", d_input, "accumulated judgments for one comparison")->required();
  decide->add_option("--peek", d_peek, "current peek index, 1-based")->required();
  decide->add_option("--out", d_out, "write the decision record as JSON");

  // simulate
  std::string sim_input, sim_out;
  std::vector<std::string> sim_kinds;
  std::vector<std::uint64_t> sim_budgets;
  int sim_peeks = 3;
  double sim_alpha = 0.05, sim_futility = 0.5, sim_split = 2.0, sim_bin = 0.5;
  std::uint64_t sim_reps = 1000;
  std::optional<std::uint64_t> sim_seed;
  unsigned sim_workers = 0;
  auto* simulate = app.add_subcommand("simulate", "benchmark testing procedures by bootstrap");
  simulate->add_option("--input", sim_input, "judgment CSV file")->required();
  simulate->add_option("--kind", sim_kinds, "plan kinds to benchmark (repeatable)");
  simulate->add_option("--budgets", sim_budgets, "planned budgets (repeatable)");
  simulate->add_option("--peeks", sim_peeks, "peeks for interim plans");
  simulate->add_option("--alpha", sim_alpha, "two-sided significance level");
  simulate->add_option("--futility-p", sim_futility, "futility threshold");
  simulate->add_option("--reps", sim_reps, "procedure runs per comparison and plan");
  simulate->add_option("--seed", sim_seed, "master seed");
  simulate->add_option("--out", sim_out, "output directory")->required();
  simulate->add_option("--workers", sim_workers, "worker threads (0 = hardware)");
  simulate->add_option("--split-threshold", sim_split, "small/large |diff| cut in DA points");
  simulate->add_option("--bin-width", sim_bin, "difference histogram bin width");

  // de
  double de_rho = 0.0;
  std::optional<double> de_reducible, de_gamma;
  auto* de = app.add_subcommand("de", "control-variates data efficiency");
  de->add_option("--rho", de_rho, "sentence-level metric correlation")->required();
  de->add_option("--reducible", de_reducible, "reducible variance fraction in (0,1)");
  de->add_option("--gamma", de_gamma, "noise-to-signal variance ratio");

  // plan
  std::string pl_kind, pl_out;
  std::uint64_t pl_budget = 0;
  int pl_peeks = 3;
  double pl_alpha = 0.05;
  std::optional<double> pl_futility;
  auto* plan = app.add_subcommand("plan", "resolve and print a sequential plan as JSON");
  plan->add_option("--kind", pl_kind, "fixed, interim or interim-futility")->required();
  plan->add_option("--budget", pl_budget, "total judgment budget")->required();
  plan->add_option("--peeks", pl_peeks, "planned peeks");
  plan->add_option("--alpha", pl_alpha, "two-sided significance level");
  plan->add_option("--futility-p", pl_futility, "futility threshold");
  plan->add_option("--out", pl_out, "write the plan JSON to a file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(v_input);
    if (*mde) return cmd_mde(m_input, m_alpha, m_rate, m_by_language, m_out);
    if (*samplesize) {
      return cmd_samplesize(s_delta, s_mean, s_variance, s_alpha, s_accuracy, s_reps, s_seed,
                            s_cap, s_workers);
    }
    if (*power) {
      return cmd_power(p_mean, p_variance, p_delta, p_total, p_alpha, p_reps, p_seed, p_workers);
    }
    if (*decide) {
      return cmd_decide(d_plan, d_kind, d_budget, d_peeks, d_alpha, d_futility, d_input, d_peek,
                        d_out);
    }
    if (*simulate) {
      return cmd_simulate(sim_input, sim_kinds, sim_budgets, sim_peeks, sim_alpha, sim_futility,
                          sim_reps, sim_seed, sim_out, sim_workers, sim_split, sim_bin);
    }
    if (*de) return cmd_de(de_rho, de_reducible, de_gamma);
    if (*plan) return cmd_plan(pl_kind, pl_budget, pl_peeks, pl_alpha, pl_futility, pl_out);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pairtest::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
