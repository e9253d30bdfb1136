#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netlqg/types.hpp"

namespace netlqg {

struct SolverConfig {
  std::int64_t n_samples = 20000;
  std::uint64_t seed = 1;
  InfoMode mode = InfoMode::kPerfect;
  int N_large = 200;   // horizon for stationary-gain extraction
  double tol = 1e-4;   // gain-convergence tolerance
};

struct ExperimentConfig {
  int n_runs = 1000;
  std::uint64_t seed = 2;
  // Baselines to pair against the decentralized perfect-information loop:
  // "single" (one controller owns the plant) and/or "imperfect".
  std::vector<std::string> baselines;
};

// A complete experiment description: plant, network, solver parameters,
// and the Monte Carlo comparison to run. All seeds are explicit; nothing
// is derived from wall-clock state.
struct ScenarioConfig {
  std::string name;
  PlantSpec plant;
  NetworkSpec network;
  SolverConfig solver;
  ExperimentConfig experiment;
  std::string out_dir = "out";

  void validate() const;
};

// Two-state plant with a pair of identically actuated controllers and a
// strongly state-weighted cost. Both delay spreads cover the full period
// and every network success probability is 0.9.
ScenarioConfig builtin_generic();

// Four-state load-frequency control plant [power command, frequency
// deviation, generator output, governor valve] with two area controllers
// driving the first two states; identity state weights, unit input
// weights, same network as the generic scenario.
ScenarioConfig builtin_lfc();

const std::vector<std::string>& builtin_names();

// Throws std::invalid_argument listing the builtins when name is unknown.
ScenarioConfig builtin_scenario(const std::string& name);

// JSON round trip. serialize emits deterministic, human-editable text with
// matrices as row-major nested arrays; parse validates the result and
// reports the offending field on error. parse(serialize(c)) == c exactly
// (doubles survive the round trip bit for bit).
std::string serialize_config(const ScenarioConfig& config);
ScenarioConfig parse_config(const std::string& text);

ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& config, const std::string& path);

// Single-controller baseline: controller 1 keeps its input map and weight,
// the others are removed; the network keeps controller 1's channels. Used
// to pair a centralized run against the decentralized loop.
PlantSpec single_controller_plant(const PlantSpec& plant);
NetworkSpec single_controller_network(const NetworkSpec& network);

}  // namespace netlqg
