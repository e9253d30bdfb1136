#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netlqg/discretization.hpp"
#include "netlqg/network.hpp"
#include "netlqg/solver.hpp"

namespace netlqg {

// What a perfect-information controller does when its sensor packet is
// lost. kEventDriven emits nothing (the shared history records a zero
// control for that slot); kAlwaysEmit plays the feedback law every step
// regardless, which is the closed loop the value recursion prices.
// Delivery to the actuator stays gated by the network either way.
// Imperfect-information schedules always emit their masked law, so the
// policy only affects perfect-information runs.
enum class EmissionPolicy { kEventDriven, kAlwaysEmit };

struct SimulationTrace {
  int N = 0;
  int M = 0;
  int K = 0;
  int p = 0;
  std::vector<Vector> x;                           // x[k], k = 0..N
  std::vector<std::vector<Vector>> u;              // u[i][k] issued (zero if no emission)
  std::vector<std::vector<std::uint8_t>> emitted;  // emitted[i][k]
  std::vector<std::vector<Vector>> u_applied;      // u_applied[i][k], actuator hold
  ScenarioRealization realization;
  double J_joint = 0.0;
  std::vector<double> J;  // per-controller realized cost
};

// Controller i's issued control at step k, or nothing when an
// event-driven controller misses its sensor packet. z is the stacked
// [x_k; issued-control history] vector the gains act on. Under perfect
// information the emission is -(L[i][k] z); under imperfect information
// the gain blocks are masked by the realized sensor and exchange-link
// indicators, so a lost link silently drops that term and the controller
// always emits.
std::optional<Vector> controller_emit(int i, int k, const Vector& z,
                                      const GainSchedule& schedule,
                                      const ScenarioRealization& realization,
                                      EmissionPolicy policy = EmissionPolicy::kEventDriven);

// One exact plant step under the realized delays and deliveries at step k:
//   applied_i = delivered_i ? issued_i : held_i            (zero-order hold)
//   x_next    = Phi x + sum_i [Gamma0_i applied_i + Gamma1_i held_i]
// steps[i] is controller i's discretization at its realized delay (see
// PlantDiscretizer::step); held_i is the input the actuator was applying
// during step k-1, zero before any delivery.
struct PlantStep {
  Vector x_next;
  std::vector<Vector> applied;
};

PlantStep step_plant(const std::vector<DiscreteStep>& steps, const Vector& x,
                     const std::vector<Vector>& held,
                     const std::vector<Vector>& issued,
                     const std::vector<std::uint8_t>& delivered);

// Simulates one seeded episode of the closed loop. Every step the state
// update is computed twice, once through the actuator hold recursion and
// once through the equivalent expansion over past issued controls, and
// the two must agree to 1e-12 (relative to the state scale); a mismatch
// throws. Costs are the realized quadratic sums: J_joint charges every
// controller's issued effort, J[i] charges only controller i's.
SimulationTrace run_episode(const PlantSpec& plant, const NetworkSpec& network,
                            const GainSchedule& schedule, std::uint64_t seed,
                            EmissionPolicy policy = EmissionPolicy::kEventDriven);

struct CostSummary {
  std::string name;
  int runs = 0;
  std::vector<double> mean;       // per-controller realized cost
  std::vector<double> std_error;  // sample std / sqrt(runs)
  double joint_mean = 0.0;
  double joint_std_error = 0.0;
  std::vector<double> joint_per_run;  // for paired differences across schedules
  std::vector<std::uint64_t> run_seeds;
};

// Runs n_runs episodes of every named schedule on the same plant and
// network. Run r of every schedule uses the episode seed
// derive_seed(seed, r), so all schedules see identical realizations and
// their costs can be paired run by run; the pairing extends across
// separate calls that share (n_runs, seed), because scenario draws are
// counter-keyed per controller. Summaries come back in name order.
std::vector<CostSummary> run_monte_carlo(
    const PlantSpec& plant, const NetworkSpec& network,
    const std::map<std::string, GainSchedule>& schedules, int n_runs,
    std::uint64_t seed, EmissionPolicy policy = EmissionPolicy::kEventDriven);

}  // namespace netlqg
