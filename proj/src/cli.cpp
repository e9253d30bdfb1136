#include "netlqg/cli.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netlqg/gain_io.hpp"
#include "netlqg/scenarios.hpp"
#include "netlqg/simulator.hpp"
#include "netlqg/solver.hpp"

namespace netlqg {

namespace {

struct CliOptions {
  std::string scenario;
  std::string config_path;
  std::string out_dir;
  std::string mode;
  int runs = 0;
  long long samples = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
};

std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void add_common(CLI::App* sub, CliOptions& o) {
  sub->add_option("--scenario", o.scenario, "builtin scenario name (generic, lfc)");
  sub->add_option("--config", o.config_path, "path to a scenario config file");
  sub->add_option("--runs", o.runs, "override experiment.n_runs")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "override solver and experiment seeds");
  sub->add_option("--samples", o.samples, "override solver.n_samples")
      ->check(CLI::PositiveNumber);
  sub->add_option("--mode", o.mode, "information mode: perfect or imperfect")
      ->check(CLI::IsMember({"perfect", "imperfect"}));
  sub->add_option("--out-dir", o.out_dir, "artifact output directory");
  sub->add_option("--alpha", o.alpha, "override every delay spread fraction")
      ->check(CLI::NonNegativeNumber);
}

ScenarioConfig resolve_config(const CLI::App* sub, const CliOptions& o) {
  const bool has_scenario = sub->count("--scenario") > 0;
  const bool has_config = sub->count("--config") > 0;
  if (has_scenario == has_config) {
    throw std::invalid_argument("give exactly one of --scenario or --config");
  }
  ScenarioConfig c =
      has_scenario ? builtin_scenario(o.scenario) : load_config(o.config_path);

  if (sub->count("--runs") > 0) c.experiment.n_runs = o.runs;
  if (sub->count("--seed") > 0) {
    c.solver.seed = o.seed;
    c.experiment.seed = o.seed;
  }
  if (sub->count("--samples") > 0) {
    if (o.samples > std::numeric_limits<int>::max()) {
      throw std::invalid_argument("--samples too large");
    }
    c.solver.n_samples = o.samples;
  }
  if (sub->count("--mode") > 0) {
    c.solver.mode = o.mode == "perfect" ? InfoMode::kPerfect : InfoMode::kImperfect;
  }
  if (sub->count("--out-dir") > 0) c.out_dir = o.out_dir;
  if (sub->count("--alpha") > 0) {
    for (auto& a : c.network.delay_alpha) a = o.alpha;
  }
  // The network metadata follows the solve mode so artifacts, hashes, and
  // filenames stay mutually consistent.
  c.network.info_mode = c.solver.mode;
  c.validate();
  return c;
}

std::string artifact_prefix(const ScenarioConfig& c) {
  return c.out_dir + "/" + c.name + "_" + to_string(c.solver.mode);
}

GameSolution solve_and_save(const ScenarioConfig& c) {
  GameSolution sol = solve_game(c.plant, c.network, static_cast<int>(c.solver.n_samples),
                                c.solver.seed, c.solver.mode);
  sol.schedule.spec_hash = spec_hash(c.plant, c.network);
  const std::string prefix = artifact_prefix(c);
  save_gains(sol.schedule, prefix + "_gains.bin");
  write_gain_csv(sol.schedule, prefix + "_gains.csv");

  double worst_eig = 0.0;
  double worst_asym = 0.0;
  for (const auto& per : sol.min_eigenvalue) {
    for (double v : per) worst_eig = std::min(worst_eig, v);
  }
  for (const auto& per : sol.asymmetry) {
    for (double v : per) worst_asym = std::max(worst_asym, v);
  }
  std::cout << "solved " << c.name << " (" << to_string(c.solver.mode)
            << "): N=" << c.plant.N << ", samples=" << c.solver.n_samples
            << ", seed=" << c.solver.seed << "\n";
  std::cout << "  predicted costs:";
  for (double v : sol.predicted_cost) std::cout << " " << fmt6(v);
  std::cout << "\n  value matrices: min eigenvalue " << fmt6(worst_eig)
            << ", max assembly asymmetry " << fmt6(worst_asym) << "\n";
  std::cout << "  wrote " << prefix + "_gains.bin" << " and " << prefix + "_gains.csv"
            << "\n";
  return sol;
}

GainSchedule load_checked(const ScenarioConfig& c) {
  const std::string path = artifact_prefix(c) + "_gains.bin";
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("no gain container at " + path + "; run solve first");
  }
  GainSchedule sched = load_gains(path);
  const std::uint64_t expect = spec_hash(c.plant, c.network);
  if (sched.spec_hash != expect) {
    throw std::runtime_error("gain container " + path +
                             " was solved for a different plant/network "
                             "(spec hash mismatch); re-run solve");
  }
  return sched;
}

void simulate_and_save(const ScenarioConfig& c, const GainSchedule& sched) {
  const SimulationTrace tr =
      run_episode(c.plant, c.network, sched, c.experiment.seed);
  const std::string path = artifact_prefix(c) + "_trace.csv";
  write_trace_csv(tr, path);
  std::cout << "simulated " << c.name << " (" << to_string(c.solver.mode)
            << "): seed=" << c.experiment.seed << ", |x_0|=" << fmt6(tr.x.front().norm())
            << ", |x_N|=" << fmt6(tr.x.back().norm()) << "\n";
  std::cout << "  realized joint cost " << fmt6(tr.J_joint) << ", per controller:";
  for (double v : tr.J) std::cout << " " << fmt6(v);
  std::cout << "\n  wrote " << path << "\n";
}

void compare_and_save(const ScenarioConfig& c, const GainSchedule& primary) {
  const int n_samples = static_cast<int>(c.solver.n_samples);
  const std::string primary_name =
      "decentralized-" + to_string(c.solver.mode);

  std::map<std::string, GainSchedule> decentralized;
  decentralized.emplace(primary_name, primary);
  for (const auto& b : c.experiment.baselines) {
    if (b == "imperfect" && c.solver.mode == InfoMode::kPerfect) {
      GameSolution sol = solve_game(c.plant, c.network, n_samples, c.solver.seed,
                                    InfoMode::kImperfect);
      decentralized.emplace("decentralized-imperfect", std::move(sol.schedule));
    }
  }

  std::vector<CostSummary> summaries = run_monte_carlo(
      c.plant, c.network, decentralized, c.experiment.n_runs, c.experiment.seed);

  for (const auto& b : c.experiment.baselines) {
    if (b != "single") continue;
    const PlantSpec plant1 = single_controller_plant(c.plant);
    const NetworkSpec net1 = single_controller_network(c.network);
    GameSolution sol =
        single_controller_gains(plant1, net1, n_samples, c.solver.seed);
    std::map<std::string, GainSchedule> single;
    single.emplace("single-perfect", std::move(sol.schedule));
    // Same (n_runs, seed): run r of this batch reuses run r's seed above,
    // and scenario draws are counter-keyed per controller, so controller
    // 1's channels realize identically and the costs pair run by run.
    std::vector<CostSummary> s1 = run_monte_carlo(
        plant1, net1, single, c.experiment.n_runs, c.experiment.seed);
    summaries.insert(summaries.end(), s1.begin(), s1.end());
  }

  const std::string csv_path = c.out_dir + "/" + c.name + "_comparison.csv";
  write_summary_csv(summaries, csv_path);

  std::ostringstream txt;
  txt << "scenario " << c.name << ": " << c.experiment.n_runs
      << " paired runs, seed " << c.experiment.seed << "\n";
  for (const auto& s : summaries) {
    txt << s.name << ": joint cost " << fmt6(s.joint_mean) << " (se "
        << fmt6(s.joint_std_error) << ")";
    txt << ", per controller:";
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
      txt << " " << fmt6(s.mean[i]) << " (se " << fmt6(s.std_error[i]) << ")";
    }
    txt << "\n";
  }
  const CostSummary* prim = nullptr;
  for (const auto& s : summaries) {
    if (s.name == primary_name) prim = &s;
  }
  for (const auto& s : summaries) {
    if (prim == nullptr || &s == prim) continue;
    double mean = 0.0;
    for (int r = 0; r < prim->runs; ++r) {
      mean += s.joint_per_run[r] - prim->joint_per_run[r];
    }
    mean /= prim->runs;
    double ss = 0.0;
    for (int r = 0; r < prim->runs; ++r) {
      const double d = s.joint_per_run[r] - prim->joint_per_run[r] - mean;
      ss += d * d;
    }
    const double se = std::sqrt(ss / (prim->runs - 1) / prim->runs);
    txt << "paired joint-cost excess of " << s.name << " over " << primary_name
        << ": " << fmt6(mean) << " (se " << fmt6(se) << ")\n";
  }
  const std::string txt_path = c.out_dir + "/" + c.name + "_summary.txt";
  atomic_write_file(txt_path, txt.str());
  std::cout << txt.str();
  std::cout << "wrote " << csv_path << " and " << txt_path << "\n";
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
  CLI::App app{"decentralized gain solver and closed-loop simulator for "
               "lossy, delayed control networks"};
  app.require_subcommand(1);
  CliOptions o;
  add_common(app.add_subcommand("solve", "solve gains, write the gain container"), o);
  add_common(app.add_subcommand("simulate",
                                "replay one seeded episode from solved gains"),
             o);
  add_common(app.add_subcommand("compare",
                                "Monte Carlo comparison against the configured baselines"),
             o);
  add_common(app.add_subcommand("full", "solve, simulate, and compare in one run"), o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    const ScenarioConfig c = resolve_config(sub, o);
    std::filesystem::create_directories(c.out_dir);
    const std::string cmd = sub->get_name();
    if (cmd == "solve") {
      solve_and_save(c);
    } else if (cmd == "simulate") {
      simulate_and_save(c, load_checked(c));
    } else if (cmd == "compare") {
      compare_and_save(c, load_checked(c));
    } else {
      const GameSolution sol = solve_and_save(c);
      simulate_and_save(c, sol.schedule);
      compare_and_save(c, sol.schedule);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace netlqg
