#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "netlqg/discretization.hpp"
#include "netlqg/layout.hpp"
#include "netlqg/types.hpp"

namespace netlqg {

// One joint draw of every controller's input-history weights at step k:
// a delay and a delivery history per controller, expanded through
// build_beta. Used directly by verification paths; the estimator below
// consumes the same draws in a compact form.
struct BetaSample {
  int k = 0;
  std::vector<double> tau;                         // per controller
  std::vector<std::vector<std::uint8_t>> theta;    // [i][0..k] end-to-end
  std::vector<std::uint8_t> theta_sc_now;          // sensor hop at step k
  std::vector<BetaSet> beta;                       // per controller
};

// Draw `sample_index` of the estimator's stream. Delivery flags are keyed
// by lag (distance back from the current step), so the draw at lag d is
// the same number regardless of which step k consumes it; that makes the
// per-step moment estimates a deterministic function of (seed, sample)
// and lets the backward recursion converge instead of resampling noise.
BetaSample sample_beta_joint(const PlantSpec& plant, const NetworkSpec& network,
                             int k, std::uint64_t seed, std::uint64_t sample_index);

// Expectations over delays and losses that one backward step consumes,
// estimated as plain averages over one shared sample stream (common
// random numbers across every entry). Entry shapes follow the stacked
// layout at step k; W[i] is indexed by atom pairs, where atom (l, j)
// stands for the lag-j weight of controller l and lives at block
// atom(l, j) = l * (k + 1) + j.
struct MomentSet {
  int k = 0;
  int n_samples = 0;
  std::uint64_t seed = 0;
  InfoMode mode = InfoMode::kPerfect;
  AugmentedLayout layout;
  Matrix Phi;

  // Information-availability probabilities used by the coefficient
  // equations (all ones in perfect mode).
  std::vector<double> sigma;              // own-state availability, per i
  std::vector<std::vector<double>> pi;    // pi[i][m]: m's history available to i

  // Raw stream averages.
  std::vector<std::vector<Matrix>> mu;                  // mu[l][j] = E[beta^j_l]
  std::vector<std::vector<std::vector<Matrix>>> mu_gated;
  // mu_gated[g][l][j] = E[gate_g * beta^j_l] with gate_g the availability
  // switch of controller g's own state this step (== mu when gates are 1).
  std::vector<std::vector<double>> gate2;               // E[gate_g * gate_h]
  std::vector<Matrix> W;  // per controller i: (n_atoms*K) x (n_atoms*K),
                          // block (a,b) = E[(beta_a)^T Sxx_i beta_b]

  // Assembled per-controller blocks of the coefficient equations.
  std::vector<Matrix> G;                 // K x K: R_i + E[D^T S_i D]
  std::vector<std::vector<Matrix>> Y;    // Y[i][l]: K x K cross-coupling
  std::vector<Matrix> rhs;               // K x dim: E[D^T S_i C] at zero coefficients

  int n_atoms() const { return layout.p * (k + 1); }
  int atom(int l, int j) const { return l * (k + 1) + j; }
  Eigen::Block<const Matrix> W_block(int i, int a, int b) const {
    const int K = layout.K;
    return W[i].block(a * K, b * K, K, K);
  }
};

// Estimator with the per-sample draws cached once per (seed, n_samples):
// every step of a solve reuses the same stream, so consecutive steps see
// the same estimated expectations and the recursion is deterministic.
class MomentEngine {
 public:
  MomentEngine(const PlantSpec& plant, const NetworkSpec& network, InfoMode mode,
               int n_samples, std::uint64_t seed);
  ~MomentEngine();

  // S_next holds each controller's value matrix at step k + 1
  // (dimension M + p(k+1)K). Throws SolverError if an assembled G fails
  // the positive-definiteness check.
  MomentSet estimate(int k, const std::vector<Matrix>& S_next) const;

  const Matrix& Phi() const;

 private:
  struct Stream;
  std::unique_ptr<Stream> stream_;
};

// One-shot convenience around MomentEngine (the mode is taken from the
// network spec).
MomentSet estimate_moments(const PlantSpec& plant, const NetworkSpec& network,
                           int k, const std::vector<Matrix>& S_next, int n_samples,
                           std::uint64_t seed);

// E[C^T S_i C] per controller for the solved feedback coefficients,
// assembled from the same stream averages as `moments` (exact common
// random numbers with the coefficient solve). A[l] is K x M, alpha[l][m]
// holds the lag blocks alpha[l][m][n-1] (K x K) for n = 1..k.
std::vector<Matrix> expected_csc(
    const MomentSet& moments, const std::vector<Matrix>& A,
    const std::vector<std::vector<std::vector<Matrix>>>& alpha,
    const std::vector<Matrix>& S_next);

}  // namespace netlqg
