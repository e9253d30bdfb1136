#pragma once

#include <cstdint>
#include <vector>

#include "netlqg/types.hpp"

namespace netlqg {

// One seeded draw of every network random variable an episode needs.
// Indexing is [k][i] (step, controller); theta_link is [k][i][m] and
// records whether the control controller m issued at step k reached
// controller i when the controllers exchanged signals that step.
struct ScenarioRealization {
  int N = 0;
  int p = 0;
  std::vector<std::vector<double>> tau;
  std::vector<std::vector<std::uint8_t>> theta_sc;   // sensor -> controller
  std::vector<std::vector<std::uint8_t>> theta_ca;   // controller -> actuator
  std::vector<std::vector<std::uint8_t>> theta;      // end to end: sc AND ca
  std::vector<std::vector<std::vector<std::uint8_t>>> theta_link;
};

// Counter-keyed sampling: entry (k, i) never depends on draw order, so the
// same seed always reproduces the same realization and controller i's
// streams are identical across experiments that share the seed (this is
// what makes paired baseline comparisons work).
ScenarioRealization sample_scenario(const PlantSpec& plant,
                                    const NetworkSpec& network,
                                    std::uint64_t seed);

// Empirical per-link statistics over a batch of realizations.
struct RateSummary {
  std::vector<double> sc_rate;
  std::vector<double> ca_rate;
  std::vector<double> end_to_end_rate;
  std::vector<std::vector<double>> link_rate;
  std::vector<double> delay_mean;
  std::vector<double> delay_var;
  long count = 0;  // realizations * steps per cell
};

RateSummary empirical_rates(const std::vector<ScenarioRealization>& runs);

}  // namespace netlqg
