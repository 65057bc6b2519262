#pragma once

// Experiment orchestration: config parsing, scenario fixtures, the
// end-to-end attack run and the epsilon-vs-size sweep.
//
// Seeds: fixtures draw from Rng(derive_seed(seed, kFixtureStream)); trial i
// of a run uses derive_seed(seed, i); sweep row r uses the root
// derive_seed(seed, kSweepStream + r) for its own trials. Identical configs
// therefore produce byte-identical outputs.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "attack.hpp"
#include "distribution.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "numeric.hpp"
#include "random.hpp"

namespace pe {

// Thrown by parse_config with every problem found, not just the first.
class ConfigError : public UsageError {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : UsageError(join(problems)), problems_(std::move(problems)) {}

  [[nodiscard]] const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "invalid config:";
    for (const auto& s : items) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> problems_;
};

struct ExperimentConfig {
  std::string scenario = "pushforward";
  unsigned n = 16;
  double k = 8;
  double delta = 0.5;
  std::optional<std::uint64_t> slices;  // T
  std::optional<double> epsilon;
  std::vector<double> epsilons;  // sweep only
  std::uint64_t trials = 200;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  // pushforward: whether f is injective; Y is flat on 2^y_bits points
  bool injective = true;
  std::optional<unsigned> y_bits;
  double spike = 0.0625;  // spiked-uniform

  [[nodiscard]] unsigned y_support_bits() const { return y_bits.value_or(static_cast<unsigned>(k) + 1); }

  // T, from "T" directly or through choose_slices(epsilon).
  [[nodiscard]] std::uint64_t resolved_slices() const {
    if (slices) return *slices;
    if (epsilon) return choose_slices(*epsilon, k, delta, n);
    return 1;
  }

  [[nodiscard]] AttackParams attack_params() const {
    return AttackParams{.n = n, .k = k, .delta = delta, .slices = resolved_slices()};
  }
};

inline const std::set<std::string>& known_scenarios() {
  static const std::set<std::string> names = {"pushforward", "identical", "spiked-uniform"};
  return names;
}

inline json config_to_json(const ExperimentConfig& c) {
  json j{{"scenario", c.scenario}, {"n", c.n},         {"k", c.k},
         {"delta", c.delta},       {"trials", c.trials}, {"seed", c.seed},
         {"injective", c.injective}, {"spike", c.spike}, {"y_bits", c.y_support_bits()}};
  if (c.slices) j["T"] = *c.slices;
  if (c.epsilon) j["epsilon"] = *c.epsilon;
  if (!c.epsilons.empty()) j["epsilons"] = c.epsilons;
  return j;
}

inline ExperimentConfig config_from_json(const json& j) {
  static const std::set<std::string> allowed = {"scenario", "n",        "k",      "delta",     "T",     "epsilon",
                                                "epsilons", "trials",   "seed",   "out_dir",   "injective",
                                                "y_bits",   "spike"};
  std::vector<std::string> problems;
  if (!j.is_object()) throw ConfigError({"config must be a JSON object"});
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) problems.push_back("unknown key \"" + key + "\"");
  }

  ExperimentConfig c;
  const auto read = [&](const char* key, auto& target, bool required) {
    if (!j.contains(key)) {
      if (required) problems.push_back("missing required field \"" + std::string(key) + "\"");
      return false;
    }
    try {
      j.at(key).get_to(target);
      return true;
    } catch (const json::exception&) {
      problems.push_back("field \"" + std::string(key) + "\" has the wrong type");
      return false;
    }
  };

  read("scenario", c.scenario, false);
  const bool has_n = read("n", c.n, true);
  const bool has_k = read("k", c.k, true);
  read("delta", c.delta, false);
  read("trials", c.trials, false);
  read("seed", c.seed, false);
  read("out_dir", c.out_dir, false);
  read("injective", c.injective, false);
  read("spike", c.spike, false);
  read("epsilons", c.epsilons, false);
  std::uint64_t t = 0;
  if (read("T", t, false)) c.slices = t;
  double eps = 0.0;
  if (read("epsilon", eps, false)) c.epsilon = eps;
  unsigned yb = 0;
  if (read("y_bits", yb, false)) c.y_bits = yb;

  if (!known_scenarios().contains(c.scenario)) {
    problems.push_back("unknown scenario \"" + c.scenario + "\" (expected pushforward, identical, spiked-uniform)");
  }
  if (has_n && (c.n < 1 || c.n > 24)) problems.push_back("\"n\" must be in [1, 24]");
  if (has_k && has_n && !(c.k >= 0.0 && c.k <= c.n)) problems.push_back("\"k\" must lie in [0, n]");
  if (has_k && c.k != std::floor(c.k)) problems.push_back("\"k\" must be an integer for the fixture scenarios");
  if (!(c.delta > 0.0 && c.delta <= 1.0)) problems.push_back("\"delta\" must lie in (0, 1]");
  if (c.trials < 1) problems.push_back("\"trials\" must be at least 1");
  if (c.slices && !is_power_of_two(*c.slices)) {
    problems.push_back("\"T\" must be a power of 2 (got " + std::to_string(*c.slices) + ")");
  }
  if (c.slices && c.epsilon) problems.push_back("give either \"T\" or \"epsilon\", not both");
  if (c.epsilon && !(*c.epsilon > 0.0)) problems.push_back("\"epsilon\" must be positive");
  for (double e : c.epsilons) {
    if (!(e > 0.0)) problems.push_back("every entry of \"epsilons\" must be positive");
  }
  if (!(c.spike >= 0.0 && c.spike <= 1.0)) problems.push_back("\"spike\" must lie in [0, 1]");
  if (has_n && has_k && problems.empty() && c.scenario != "spiked-uniform") {
    const unsigned yb_eff = c.y_support_bits();
    const double needed = std::exp2(c.k) + std::exp2(yb_eff);
    if (yb_eff > c.n || needed > std::exp2(c.n)) {
      problems.push_back("domain too small for X on 2^k points and a disjoint Y on 2^y_bits points");
    }
    if (yb_eff < c.k) problems.push_back("\"y_bits\" must be at least k so that Y has min-entropy k");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return c;
}

inline ExperimentConfig parse_config(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError({"'" + path + "' is not valid JSON: " + e.what()});
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Scenarios

inline constexpr std::uint64_t kFixtureStream = std::uint64_t{1} << 40;
inline constexpr std::uint64_t kSweepStream = std::uint64_t{1} << 41;

struct Scenario {
  Distribution x;
  Distribution y;
};

inline Scenario build_scenario(const ExperimentConfig& c) {
  Rng rng(derive_seed(c.seed, kFixtureStream));
  const auto seed_bits = static_cast<unsigned>(c.k);
  if (c.scenario == "spiked-uniform") {
    return {spiked_uniform(c.n, c.spike), uniform(c.n)};
  }
  // X = f(U_k), then Y flat on 2^y_bits points outside supp(X).
  Distribution x = [&] {
    const std::uint64_t inputs = std::uint64_t{1} << seed_bits;
    if (c.injective) return flat_on(c.n, sample_distinct_points(c.n, inputs, rng));
    std::vector<std::uint64_t> table(inputs);
    for (auto& v : table) v = uniform_below(rng, std::uint64_t{1} << c.n);
    return pushforward(c.n, std::move(table));
  }();
  std::vector<std::uint64_t> x_support;
  x.for_each_nonzero([&](std::uint64_t p, double) { x_support.push_back(p); });
  Distribution y = flat_on(c.n, sample_distinct_points(c.n, std::uint64_t{1} << c.y_support_bits(), rng, x_support));
  if (c.scenario == "identical") return {y, y};
  return {std::move(x), std::move(y)};
}

// ---------------------------------------------------------------------------
// Runs

struct ExperimentOutput {
  json report;
  std::string csv;
  bool threshold_met = false;
  bool guaranteed = true;
  bool vacuous = false;

  [[nodiscard]] int exit_code() const noexcept { return threshold_met ? 0 : 1; }
  [[nodiscard]] std::string report_text() const { return report.dump(2) + "\n"; }
};

inline json fixture_summary(const Scenario& s, const ExperimentConfig& c) {
  return json{{"x_support", s.x.support_size()},
              {"y_support", s.y.support_size()},
              {"x_min_entropy", min_entropy(s.x)},
              {"x_smooth_min_entropy", smooth_min_entropy(s.x, c.delta)},
              {"x_mass_above_threshold", mass_above_threshold(s.x, c.k)},
              {"y_min_entropy", min_entropy(s.y)},
              {"euclidean_distance", euclidean_distance(s.x, s.y)},
              {"statistical_distance", statistical_distance(s.x, s.y)}};
}

struct TrialBatch {
  std::vector<AttackReport> reports;
  std::uint64_t successes = 0;
  double mean_advantage = 0.0;

  [[nodiscard]] double fraction() const {
    return reports.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(reports.size());
  }
  [[nodiscard]] double wilson_lower() const { return wilson_lower_bound(successes, reports.size()); }
};

inline TrialBatch run_trials(const AttackInstance& instance, std::uint64_t trials, std::uint64_t root_seed) {
  TrialBatch batch;
  batch.reports.reserve(trials);
  CompensatedSum adv;
  for (std::uint64_t i = 0; i < trials; ++i) {
    batch.reports.push_back(instance.run_seeded(derive_seed(root_seed, i)));
    if (batch.reports.back().success) ++batch.successes;
    adv += batch.reports.back().advantage;
  }
  batch.mean_advantage = trials == 0 ? 0.0 : adv.value() / static_cast<double>(trials);
  return batch;
}

// A run is vacuous when no distinguisher can be expected to work: X equals Y,
// or smoothing already lifts X to full entropy.
inline bool is_vacuous(const Distribution& x, const Distribution& y, double delta) {
  return x == y || smooth_min_entropy(x, delta) >= static_cast<double>(x.bits());
}

// Success criterion: the Wilson 95% lower bound of the success fraction must
// reach 1/17. Checked on every non-vacuous run, including boundary instances
// where smooth min-entropy equals k and the strict guarantee is not claimed.
inline ExperimentOutput run_experiment(const ExperimentConfig& c) {
  const Scenario scenario = build_scenario(c);
  const AttackParams params = c.attack_params();
  const AttackInstance instance(scenario.x, scenario.y, params);
  const TrialBatch batch = run_trials(instance, c.trials, c.seed);

  ExperimentOutput out;
  out.guaranteed = instance.guaranteed();
  out.vacuous = is_vacuous(scenario.x, scenario.y, c.delta);
  out.threshold_met = out.vacuous || batch.wilson_lower() >= kSuccessProbabilityFloor;

  json trials = json::array();
  std::ostringstream csv;
  csv << kTrialCsvHeader << '\n';
  for (std::size_t i = 0; i < batch.reports.size(); ++i) {
    trials.push_back(attack_report_to_json(batch.reports[i]));
    csv << attack_report_csv_row(i, batch.reports[i]) << '\n';
  }
  out.csv = csv.str();
  out.report = json{
      {"library_version", kLibraryVersion},
      {"csv_schema", kCsvSchemaVersion},
      {"config", config_to_json(c)},
      {"params", {{"n", params.n}, {"k", params.k}, {"delta", params.delta}, {"T", params.slices}}},
      {"fixture", fixture_summary(scenario, c)},
      {"guaranteed", out.guaranteed},
      {"vacuous", out.vacuous},
      {"status", out.guaranteed ? "guarantee applies" : "no guarantee"},
      {"size_model", "T + 2 n^2 gate-equivalents (hash circuits modeled at n^2 each)"},
      {"summary",
       {{"trials", batch.reports.size()},
        {"successes", batch.successes},
        {"fraction", batch.fraction()},
        {"wilson_lower", batch.wilson_lower()},
        {"floor", kSuccessProbabilityFloor},
        {"mean_advantage", batch.mean_advantage},
        {"bound", params.bound()},
        {"threshold_met", out.threshold_met}}},
      {"trials", std::move(trials)},
  };
  return out;
}

inline void write_experiment(const ExperimentOutput& out, const std::string& dir, const std::string& stem = "attack") {
  std::filesystem::create_directories(dir);
  write_file((std::filesystem::path(dir) / (stem + "_report.json")).string(), out.report_text());
  write_file((std::filesystem::path(dir) / (stem + "_trials.csv")).string(), out.csv);
}

// ---------------------------------------------------------------------------
// Tradeoff sweep

struct SweepRow {
  double epsilon = 0.0;
  bool feasible = false;
  std::uint64_t slices = 0;
  double size_units = 0.0;
  double size_limit = 0.0;  // 18 * 2^k * eps^2 / delta^2 + 2 n^2
  double bound = 0.0;
  double mean_advantage = 0.0;
  double success_fraction = 0.0;
  double wilson_lower = 0.0;
  bool meets_floor = false;
  std::string note;
};

inline double sweep_size_limit(double epsilon, double k, double delta, unsigned n) {
  return 18.0 * std::exp2(k) * epsilon * epsilon / (delta * delta) + 2.0 * static_cast<double>(n) * n;
}

struct SweepOutput {
  std::vector<SweepRow> rows;
  std::string csv;
  bool threshold_met = false;

  [[nodiscard]] int exit_code() const noexcept { return threshold_met ? 0 : 1; }
};

inline constexpr std::string_view kSweepCsvHeader =
    "epsilon,feasible,T,size_units,size_limit,bound,mean_advantage,success_fraction,wilson_lower,meets_floor,note";

// Rows come out in ascending epsilon. Infeasible epsilons are kept as
// marked rows with no statistics.
inline SweepOutput sweep_tradeoff(const ExperimentConfig& c) {
  if (c.epsilons.empty()) throw UsageError("sweep needs a non-empty \"epsilons\" list");
  std::vector<double> eps = c.epsilons;
  std::sort(eps.begin(), eps.end());
  const Scenario scenario = build_scenario(c);

  SweepOutput out;
  out.threshold_met = true;
  std::ostringstream csv;
  csv << kSweepCsvHeader << '\n';
  for (std::size_t r = 0; r < eps.size(); ++r) {
    SweepRow row;
    row.epsilon = eps[r];
    row.size_limit = sweep_size_limit(eps[r], c.k, c.delta, c.n);
    try {
      row.slices = choose_slices(eps[r], c.k, c.delta, c.n);
      row.feasible = true;
    } catch (const RangeError& e) {
      row.note = "infeasible";
    }
    if (row.feasible) {
      const AttackParams params{.n = c.n, .k = c.k, .delta = c.delta, .slices = row.slices};
      const AttackInstance instance(scenario.x, scenario.y, params);
      const TrialBatch batch = run_trials(instance, c.trials, derive_seed(c.seed, kSweepStream + r));
      row.size_units = circuit_size_estimate(params);
      row.bound = params.bound();
      row.mean_advantage = batch.mean_advantage;
      row.success_fraction = batch.fraction();
      row.wilson_lower = batch.wilson_lower();
      row.meets_floor = is_vacuous(scenario.x, scenario.y, c.delta) || row.wilson_lower >= kSuccessProbabilityFloor;
      if (!instance.guaranteed()) row.note = "no guarantee";
      // T cannot drop below 1, so tiny epsilons overshoot the size limit.
      if (row.size_units > row.size_limit) row.note += row.note.empty() ? "size above limit" : "; size above limit";
      out.threshold_met = out.threshold_met && row.meets_floor && row.size_units <= row.size_limit;
    }
    csv << format_double(row.epsilon) << ',' << (row.feasible ? 1 : 0) << ',';
    if (row.feasible) {
      csv << row.slices << ',' << format_double(row.size_units) << ',' << format_double(row.size_limit) << ','
          << format_double(row.bound) << ',' << format_double(row.mean_advantage) << ','
          << format_double(row.success_fraction) << ',' << format_double(row.wilson_lower) << ','
          << (row.meets_floor ? 1 : 0);
    } else {
      csv << ",," << format_double(row.size_limit) << ",,,,,";
    }
    csv << ',' << row.note << '\n';
    out.rows.push_back(std::move(row));
  }
  out.csv = csv.str();
  return out;
}

}  // namespace pe
