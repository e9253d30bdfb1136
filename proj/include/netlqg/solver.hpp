#pragma once

#include <cstdint>
#include <vector>

#include "netlqg/moments.hpp"

namespace netlqg {

// Solution of the coupled per-step coefficient equations. The feedback
// law of controller i at step k is
//   u_{i,k} = A_i x_k + sum_{m,n} alpha_i^{m,n} u_{m,k-n}
// (with each term masked by its availability switch when information is
// imperfect). primed[i] holds the stacked-solve row [sigma_i A_i |
// pi_{i,m} alpha_i^{m,n}]: the availability-weighted coefficients the
// value recursion works with. In perfect mode primed equals [A | alpha].
struct Coefficients {
  int k = 0;
  std::vector<Matrix> A;                                 // [i]: K x M
  std::vector<std::vector<std::vector<Matrix>>> alpha;   // [i][m][n-1]: K x K
  std::vector<Matrix> primed;                            // [i]: K x (M + pkK)
};

// Solves the stacked linear system over all controllers at once:
//   G_i primed_i + sum_{l != i} Y_i^l primed_l = -rhs_i.
// Throws SolverError when the stacked matrix is near-singular (reports
// the step and a reciprocal condition estimate) or when imperfect-mode
// availability probabilities are zero (the unscaled coefficients are
// then unidentifiable).
Coefficients solve_coefficients(const MomentSet& moments);

// One backward step: the gain L_i = -[A_i | alpha_i blocks] and
//   S_{i,k} = Qbar_1 + E[C^T S' C] - primed_i^T G_i primed_i,
// symmetrized, with a positive-semidefiniteness check (throws
// SolverError when the minimum eigenvalue drops below -1e-8 * ||S||).
struct StepResult {
  std::vector<Matrix> L;
  std::vector<Matrix> S;
  std::vector<double> min_eigenvalue;
  std::vector<double> asymmetry;  // max |S - S^T| before symmetrization
};

StepResult riccati_step(const PlantSpec& plant, int k, const std::vector<Matrix>& S_next,
                        const Coefficients& coeffs, const MomentSet& moments);

// Full time-varying feedback schedule. L[i][k] is the stacked gain over
// [state | history], always the exact negative block assembly of A[i][k]
// and alpha[i][k]; sigma/pi record the availability means the laws were
// solved under (all ones in perfect mode).
struct GainSchedule {
  InfoMode mode = InfoMode::kPerfect;
  int M = 0, K = 0, p = 0, N = 0;
  int n_samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t spec_hash = 0;  // filled by persistence/CLI layers
  std::vector<double> sigma;
  std::vector<std::vector<double>> pi;
  std::vector<std::vector<Matrix>> L;  // [i][k]: K x (M + pkK)
  std::vector<std::vector<Matrix>> A;  // [i][k]: K x M
  std::vector<std::vector<std::vector<std::vector<Matrix>>>> alpha;  // [i][k][m][n-1]

  // Dimension bookkeeping; throws std::invalid_argument on any mismatch,
  // including L not being the negative block assembly of A and alpha.
  void validate() const;
};

struct SolveOptions {
  bool keep_value_matrices = false;
};

struct GameSolution {
  GainSchedule schedule;
  std::vector<Matrix> S0;              // per controller, M x M value matrix at k = 0
  std::vector<double> predicted_cost;  // x0^T S0 x0
  // Per controller, indexed k = 0..N (terminal included).
  std::vector<std::vector<double>> min_eigenvalue;
  // Per controller, indexed k = 0..N-1: assembly asymmetry before the
  // symmetrization of S_{i,k}.
  std::vector<std::vector<double>> asymmetry;
  // Kept only when SolveOptions.keep_value_matrices: S[i][k], k = 0..N.
  std::vector<std::vector<Matrix>> S;
};

// Backward recursion over the whole horizon. One shared sample stream
// (seed, n_samples) serves every step, so the result is a deterministic
// function of the inputs. Throws SolverError on numerical failure and
// std::invalid_argument on spec violations.
GameSolution solve_game(const PlantSpec& plant, const NetworkSpec& network,
                        int n_samples, std::uint64_t seed, InfoMode mode,
                        const SolveOptions& options = {});

// Baseline: one controller owning the whole input. Requires plant.p() == 1.
GameSolution single_controller_gains(const PlantSpec& plant, const NetworkSpec& network,
                                     int n_samples, std::uint64_t seed,
                                     InfoMode mode = InfoMode::kPerfect);

// Stationary blocks read off a long-horizon solve at the first step k
// (scanning downward from N_large - 1) where consecutive state blocks
// and history blocks up to lag_cap change by at most tol in the
// max-row-sum norm. k = N_large - 1 has no successor and is treated as
// residual infinity, so tol = infinity returns it directly.
struct ConvergedGains {
  int k = 0;
  double residual = 0.0;
  int lag_cap = 0;
  std::vector<Matrix> A;                                // [i]: K x M
  std::vector<std::vector<std::vector<Matrix>>> alpha;  // [i][m][n-1], n <= lag_cap
};

ConvergedGains converged_gains(const PlantSpec& plant, const NetworkSpec& network,
                               int N_large, double tol, InfoMode mode, int n_samples,
                               std::uint64_t seed, int lag_cap = 10);

// Repeats the converged blocks at every step of an N-step schedule
// (history lags beyond the stored cap are zero). The result plays as a
// constant-gain controller in the simulator.
GainSchedule make_stationary_schedule(const ConvergedGains& gains, const PlantSpec& plant,
                                      const NetworkSpec& network, InfoMode mode, int N);

// Realized availability switches for one step, used when assembling the
// closed-loop matrices under imperfect information. sc[l] masks
// controller l's state term; link[l][m][n-1] masks history entry (m, n).
struct InfoSwitches {
  std::vector<std::uint8_t> sc;
  std::vector<std::vector<std::vector<std::uint8_t>>> link;
};

// Closed-loop transition blocks for one realization:
//   z_{k+1} = C_i z_k + D_i u_{i,k}
// with every controller l != i playing its feedback row (masked by the
// switches when given; nullptr means all switches closed at 1). Used to
// cross-check the solver's algebra against direct simulation.
struct CDPair {
  std::vector<Matrix> C;  // [i]: (M + p(k+1)K) x (M + pkK)
  std::vector<Matrix> D;  // [i]: (M + p(k+1)K) x K
};

CDPair assemble_CD(const Matrix& Phi, const Coefficients& coeffs, const BetaSample& sample,
                   const AugmentedLayout& layout, const InfoSwitches* switches = nullptr);

}  // namespace netlqg
