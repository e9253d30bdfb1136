#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "netlqg/simulator.hpp"
#include "netlqg/solver.hpp"

namespace netlqg {

// FNV-1a hash of a canonical text rendering of the plant and network.
// Stored in gain containers so a simulate/compare run can refuse gains
// that were solved for a different system.
std::uint64_t spec_hash(const PlantSpec& plant, const NetworkSpec& network);

// Writes bytes to path via a temp file in the same directory plus an
// atomic rename, so readers never observe a partial artifact.
void atomic_write_file(const std::string& path, const std::string& bytes);

// Gain container: a little-endian flat binary file. Layout:
//   magic "NLQGGS1\n", u32 mode, u32 M, u32 K, u32 p, u32 N,
//   u64 n_samples, u64 seed, u64 spec_hash,
//   f64 sigma[p], f64 pi[p][p] row-major,
//   then for i = 0..p-1, k = 0..N-1 the row-major K x (M + p k K)
//   stacked gain L[i][k].
// The A and alpha blocks are the exact negative sub-blocks of L, so the
// container stores only L and load reassembles the rest bit for bit.
void save_gains(const GainSchedule& schedule, const std::string& path);
GainSchedule load_gains(const std::string& path);

// CSV of the state-feedback blocks A_i^k for inspection: one row per
// (controller, step), entries row-major.
void write_gain_csv(const GainSchedule& schedule, const std::string& path);

// CSV of one episode: per step the state, issued and applied controls,
// network switch flags, and realized delays; a final row carries the
// terminal state.
void write_trace_csv(const SimulationTrace& trace, const std::string& path);

// CSV of Monte Carlo summaries: one row per (schedule, controller) plus
// a joint-cost row per schedule.
void write_summary_csv(const std::vector<CostSummary>& summaries,
                       const std::string& path);

}  // namespace netlqg
