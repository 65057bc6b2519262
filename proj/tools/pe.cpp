// pe: command line front end for the pseudoentropy library.
//
// Exit codes: 0 = every threshold checked by the command was met,
//             1 = a threshold failed, 2 = usage or input error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <pseudoentropy/pseudoentropy.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitUsage = 2;

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  std::string out_dir = ".";
  std::string format = "json";
};

void print_json(const pe::json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------
// dist

struct DistGen {
  std::string kind = "uniform";
  unsigned n = 16;
  double k = 8;
  double spike = 0.0625;
  std::uint64_t point = 0;
  std::string output;
  bool binary = false;
};

int run_dist_gen(const Globals& g, const DistGen& o) {
  const pe::FixtureParams params{.n = o.n, .k = o.k, .spike = o.spike, .point = o.point};
  const pe::Distribution d = pe::make(o.kind, params, g.seed);
  const bool binary = o.binary || (o.output.size() > 5 && o.output.ends_with(".pedl"));
  if (o.output.empty()) {
    if (binary) throw pe::UsageError("binary output needs --output");
    print_json(pe::distribution_to_json(d));
    return kExitOk;
  }
  pe::write_file(o.output, binary ? pe::distribution_to_binary(d) : pe::distribution_to_json(d).dump() + "\n");
  return kExitOk;
}

int run_dist_entropy(const std::string& input, double delta, std::optional<double> k) {
  const pe::Distribution d = pe::load_distribution(input);
  const double kk = k.value_or(std::floor(pe::min_entropy(d)) + 1.0);
  pe::json out = pe::entropy_report_to_json(pe::entropy_report(d, delta, kk));
  out["n"] = d.bits();
  out["support_size"] = d.support_size();
  print_json(out);
  return kExitOk;
}

int run_dist_distance(const std::string& a, const std::string& b) {
  const pe::Distribution da = pe::load_distribution(a);
  const pe::Distribution db = pe::load_distribution(b);
  print_json({{"statistical_distance", pe::statistical_distance(da, db)},
              {"euclidean_distance", pe::euclidean_distance(da, db)}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// attack

struct AttackFlags {
  std::optional<std::string> scenario;
  std::optional<unsigned> n;
  std::optional<double> k;
  std::optional<double> delta;
  std::optional<std::uint64_t> slices;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> trials;
  std::vector<double> epsilons;
};

pe::ExperimentConfig resolve_config(const Globals& g, const AttackFlags& f, bool seed_given) {
  pe::json j = pe::json::object();
  if (!g.config.empty()) {
    try {
      j = pe::json::parse(pe::read_file(g.config));
    } catch (const pe::json::exception& e) {
      throw pe::ConfigError({"'" + g.config + "' is not valid JSON: " + e.what()});
    }
  }
  // Command line flags override the file.
  if (f.scenario) j["scenario"] = *f.scenario;
  if (f.n) j["n"] = *f.n;
  if (f.k) j["k"] = *f.k;
  if (f.delta) j["delta"] = *f.delta;
  if (f.slices) {
    j["T"] = *f.slices;
    j.erase("epsilon");
  }
  if (f.epsilon) {
    j["epsilon"] = *f.epsilon;
    j.erase("T");
  }
  if (f.trials) j["trials"] = *f.trials;
  if (!f.epsilons.empty()) j["epsilons"] = f.epsilons;
  if (seed_given || !j.contains("seed")) j["seed"] = g.seed;
  return pe::config_from_json(j);
}

void print_summary(const pe::json& report) {
  const auto& s = report.at("summary");
  std::cerr << "status: " << report.at("status").get<std::string>() << '\n'
            << "trials: " << s.at("trials") << "  successes: " << s.at("successes")
            << "  fraction: " << s.at("fraction") << "  wilson95 lower: " << s.at("wilson_lower")
            << "  floor: " << s.at("floor") << '\n'
            << "threshold met: " << (s.at("threshold_met").get<bool>() ? "yes" : "no") << '\n';
}

int run_attack(const Globals& g, const AttackFlags& f, bool seed_given) {
  const pe::ExperimentConfig config = resolve_config(g, f, seed_given);
  const pe::ExperimentOutput out = pe::run_experiment(config);
  pe::write_experiment(out, g.out_dir);
  if (g.format == "csv") {
    std::cout << out.csv;
  } else {
    std::cout << out.report_text();
  }
  print_summary(out.report);
  return out.exit_code();
}

int run_sweep(const Globals& g, const AttackFlags& f, bool seed_given) {
  const pe::ExperimentConfig config = resolve_config(g, f, seed_given);
  const pe::SweepOutput out = pe::sweep_tradeoff(config);
  std::filesystem::create_directories(g.out_dir);
  pe::write_file((std::filesystem::path(g.out_dir) / "sweep.csv").string(), out.csv);
  if (g.format == "csv") {
    std::cout << out.csv;
  } else {
    pe::json rows = pe::json::array();
    for (const auto& r : out.rows) {
      rows.push_back({{"epsilon", r.epsilon},
                      {"feasible", r.feasible},
                      {"T", r.slices},
                      {"size_units", r.size_units},
                      {"size_limit", r.size_limit},
                      {"bound", r.bound},
                      {"mean_advantage", r.mean_advantage},
                      {"success_fraction", r.success_fraction},
                      {"wilson_lower", r.wilson_lower},
                      {"meets_floor", r.meets_floor},
                      {"note", r.note}});
    }
    print_json({{"library_version", pe::kLibraryVersion},
                {"config", pe::config_to_json(config)},
                {"rows", rows},
                {"threshold_met", out.threshold_met}});
  }
  return out.exit_code();
}

struct WorstCaseFlags {
  std::string x;
  std::string y;
  double k = 2;
  std::uint64_t slices = 1;
};

int run_worst_case(const Globals& g, const WorstCaseFlags& f) {
  if (!pe::is_power_of_two(f.slices)) throw pe::UsageError("--T must be a power of 2");
  const pe::Distribution x = pe::load_distribution(f.x);
  const pe::Distribution y = pe::load_distribution(f.y);
  pe::Rng rng(g.seed);
  const pe::SignHash sign = pe::sample_sign_hash(rng);
  const pe::SliceHash slicer = pe::sample_slice_hash(rng, pe::log2_exact(f.slices));
  const pe::SlicedDistinguisher dhat = pe::build_sliced(sign, slicer, x, y);
  const pe::WorstCase wc = pe::worst_case_advantage(dhat, x, f.k);
  pe::json advice = pe::json::array();
  for (auto b : dhat.advice()) advice.push_back(static_cast<int>(b));
  print_json({{"advantage_vs_y", std::fabs(pe::advantage_signed(dhat, x, y))},
              {"worst_case_advantage", wc.value},
              {"expectation_x", wc.expectation_x},
              {"achievable_range", {wc.lowest, wc.highest}},
              {"witness", pe::distribution_to_json(wc.witness)},
              {"sign", pe::polyhash_to_json(sign.base())},
              {"slice", pe::polyhash_to_json(slicer.base())},
              {"advice", advice}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// moments

struct MomentsFlags {
  std::vector<double> weights;
  std::size_t random = 0;
  std::string mode = "exhaustive";
  unsigned field_bits = 4;
  std::uint64_t trials = 10000;
  std::optional<std::uint64_t> slices;
};

int run_moments_check(const Globals& g, const MomentsFlags& f) {
  pe::WalkSpec spec;
  spec.seed = g.seed;
  spec.trials = f.trials;
  spec.field_bits = f.field_bits;
  spec.slices = f.slices;
  if (f.mode == "exhaustive") {
    spec.independence = pe::Independence::exhaustive_small_field;
  } else if (f.mode == "monte-carlo") {
    spec.independence = pe::Independence::monte_carlo;
  } else {
    throw pe::UsageError("--mode must be exhaustive or monte-carlo");
  }
  if (!f.weights.empty()) {
    spec.weights = f.weights;
  } else {
    const std::size_t m = f.random == 0 ? (std::size_t{1} << std::min(f.field_bits, 4u)) : f.random;
    pe::Rng rng(pe::derive_seed(g.seed, 0xC0FFEE));
    spec.weights.resize(m);
    // Multiples of 2^-10 keep exhaustive sums exact.
    for (double& w : spec.weights) w = (static_cast<double>(pe::uniform_below(rng, 2049)) - 1024.0) / 1024.0;
    spec.weights[0] = spec.weights[0] == 0.0 ? 1.0 : spec.weights[0];
  }

  const pe::AnticoncentrationResult ac = pe::anticoncentration_check(spec);
  const pe::MomentReport& r = ac.moments;
  const double s = r.sigma();
  const auto row = [](const char* name, const std::string& relation, bool ok) {
    std::cout << std::left << std::setw(26) << name << std::setw(72) << relation << (ok ? "PASS" : "FAIL") << '\n';
  };
  const auto num = [](double v) { return pe::format_double(v); };
  if (g.format == "json") {
    pe::json out = pe::moment_report_to_json(r);
    out["tail_wilson_lower"] = ac.wilson_lower;
    out["anticoncentration_passed"] = ac.passed;
    print_json(out);
  } else {
    std::cout << "weights: " << spec.weights.size() << "  samples: " << r.samples
              << (r.exact ? "  (exact family average)" : "  (monte-carlo)") << '\n';
    row("first moment lower", num(s / std::sqrt(3.0)) + " <= m1 = " + num(r.m1), r.bounds_ok.m1_lower);
    row("first moment upper", "m1 = " + num(r.m1) + " <= sigma = " + num(s), r.bounds_ok.m1_upper);
    row("second moment", "m2 = " + num(r.m2) + " == sigma^2 = " + num(r.sigma2), r.bounds_ok.m2_equal);
    row("fourth moment", num(r.sigma2 * r.sigma2) + " <= m4 = " + num(r.m4) + " <= " +
                             num(3 * r.sigma2 * r.sigma2),
        r.bounds_ok.m4_lower && r.bounds_ok.m4_upper);
    row("anticoncentration", "Pr[|Z| > sigma/3] lower " + num(ac.wilson_lower) + " >= 1/17", ac.passed);
  }
  return r.bounds_ok.all() && ac.passed ? kExitOk : kExitThreshold;
}

// ---------------------------------------------------------------------------
// ballsbins

constexpr double kBallsBinsTolerance = 0.20;

int run_ballsbins(const Globals& g, unsigned k, unsigned k_prime, std::uint64_t trials) {
  const pe::BallsBinsComparison c = pe::balls_bins(k, k_prime, trials, g.seed);
  const bool ok = c.x.offset_relative_error() <= kBallsBinsTolerance &&
                  c.y.offset_relative_error() <= kBallsBinsTolerance && c.gap > 0.0;
  print_json({{"x", pe::balls_bins_to_json(c.x)},
              {"y", pe::balls_bins_to_json(c.y)},
              {"gap", c.gap},
              {"tolerance", kBallsBinsTolerance},
              {"threshold_met", ok}});
  return ok ? kExitOk : kExitThreshold;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudoentropy attack toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "root seed")->capture_default_str();
  app.add_option("--config", g.config, "experiment config (JSON)");
  app.add_option("--out-dir", g.out_dir, "directory for reports")->capture_default_str();
  app.add_option("--format", g.format, "stdout format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  // dist
  auto* dist = app.add_subcommand("dist", "distributions");
  dist->require_subcommand(1);
  DistGen gen;
  auto* dist_gen = dist->add_subcommand("gen", "generate a fixture distribution");
  dist_gen->add_option("--kind", gen.kind, "uniform|point-mass|flat|pushforward|pushforward-injective|spiked-uniform")
      ->capture_default_str();
  dist_gen->add_option("--n", gen.n)->capture_default_str();
  dist_gen->add_option("--k", gen.k)->capture_default_str();
  dist_gen->add_option("--spike", gen.spike)->capture_default_str();
  dist_gen->add_option("--point", gen.point);
  dist_gen->add_option("--output,-o", gen.output, "file; .pedl selects the binary format");
  dist_gen->add_flag("--binary", gen.binary);

  std::string input;
  double delta = 0.5;
  std::optional<double> entropy_k;
  auto* dist_entropy = dist->add_subcommand("entropy", "entropy measures of a distribution file");
  dist_entropy->add_option("--input,-i", input)->required();
  dist_entropy->add_option("--delta", delta)->capture_default_str();
  dist_entropy->add_option("--k", entropy_k, "threshold bits for mass-above and biased set");

  std::string file_a;
  std::string file_b;
  auto* dist_distance = dist->add_subcommand("distance", "statistical and Euclidean distance");
  dist_distance->add_option("--a", file_a)->required();
  dist_distance->add_option("--b", file_b)->required();

  // attack
  auto* attack = app.add_subcommand("attack", "distinguishing attack");
  attack->require_subcommand(1);
  AttackFlags af;
  const auto add_attack_flags = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", af.scenario);
    cmd->add_option("--n", af.n);
    cmd->add_option("--k", af.k);
    cmd->add_option("--delta", af.delta);
    cmd->add_option("--T", af.slices);
    cmd->add_option("--epsilon", af.epsilon);
    cmd->add_option("--trials", af.trials);
  };
  auto* attack_run = attack->add_subcommand("run", "run attack trials on a scenario");
  add_attack_flags(attack_run);
  auto* attack_sweep = attack->add_subcommand("sweep", "epsilon vs size tradeoff");
  add_attack_flags(attack_sweep);
  attack_sweep->add_option("--epsilons", af.epsilons);
  WorstCaseFlags wf;
  auto* attack_worst = attack->add_subcommand("worst-case", "worst case over min-entropy-k distributions");
  attack_worst->add_option("--x", wf.x)->required();
  attack_worst->add_option("--y", wf.y)->required();
  attack_worst->add_option("--k", wf.k)->capture_default_str();
  attack_worst->add_option("--T", wf.slices)->capture_default_str();

  // moments
  auto* moments = app.add_subcommand("moments", "random walk moment inequalities");
  moments->require_subcommand(1);
  MomentsFlags mf;
  auto* moments_check = moments->add_subcommand("check", "pass/fail table of the moment bounds");
  moments_check->add_option("--weights", mf.weights);
  moments_check->add_option("--random", mf.random, "number of random weights");
  moments_check->add_option("--mode", mf.mode)->check(CLI::IsMember({"exhaustive", "monte-carlo"}))->capture_default_str();
  moments_check->add_option("--field-bits", mf.field_bits)->capture_default_str();
  moments_check->add_option("--trials", mf.trials)->capture_default_str();
  moments_check->add_option("--slices", mf.slices);

  // ballsbins
  auto* balls = app.add_subcommand("ballsbins", "two-bin max load");
  balls->require_subcommand(1);
  unsigned bb_k = 10;
  unsigned bb_kp = 14;
  std::uint64_t bb_trials = 2000;
  auto* balls_run = balls->add_subcommand("run", "compare 2^k and 2^k' balls");
  balls_run->add_option("--k", bb_k)->capture_default_str();
  balls_run->add_option("--k-prime", bb_kp)->capture_default_str();
  balls_run->add_option("--trials", bb_trials)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    const bool seed_given = seed_opt->count() > 0;
    if (dist_gen->parsed()) return run_dist_gen(g, gen);
    if (dist_entropy->parsed()) return run_dist_entropy(input, delta, entropy_k);
    if (dist_distance->parsed()) return run_dist_distance(file_a, file_b);
    if (attack_run->parsed()) return run_attack(g, af, seed_given);
    if (attack_sweep->parsed()) return run_sweep(g, af, seed_given);
    if (attack_worst->parsed()) return run_worst_case(g, wf);
    if (moments_check->parsed()) return run_moments_check(g, mf);
    if (balls_run->parsed()) return run_ballsbins(g, bb_k, bb_kp, bb_trials);
  } catch (const pe::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
