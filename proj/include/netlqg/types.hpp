#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "netlqg/matrix_ops.hpp"

namespace netlqg {

// Thrown when the coefficient system or value recursion fails numerically
// (near-singular stacked system, definiteness loss). Carries enough context
// to locate the failing step.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by converged_gains when no step meets the tolerance.
struct ConvergenceError : SolverError {
  using SolverError::SolverError;
};

// What the controllers are assumed to know when forming their feedback:
// kPerfect reads the full stacked state, kImperfect sees each input masked
// by its own Bernoulli availability switch.
enum class InfoMode { kPerfect, kImperfect };

inline std::string to_string(InfoMode m) {
  return m == InfoMode::kPerfect ? "perfect" : "imperfect";
}

// Continuous-time plant plus cost data for p controllers sharing one state.
//   xdot = A x + sum_i B_i u_i,  sampled with period T over N steps.
// All controllers have a common input dimension K.
struct PlantSpec {
  Matrix A;                 // M x M
  std::vector<Matrix> B;    // p entries, each M x K
  double T = 0.0;           // sampling period, > 0
  int N = 0;                // horizon length, >= 1
  Matrix Q_N;               // M x M, symmetric PSD terminal weight
  Matrix Q_1;               // M x M, symmetric PSD running state weight
  std::vector<Matrix> R;    // p entries, each K x K symmetric PD
  Vector x0;                // M

  int M() const { return static_cast<int>(A.rows()); }
  int K() const { return B.empty() ? 0 : static_cast<int>(B.front().cols()); }
  int p() const { return static_cast<int>(B.size()); }

  void validate() const;
};

// Bernoulli loss and uniform delay model for the two-hop network around
// each controller. Success probability semantics throughout: the value is
// the probability that a packet ARRIVES.
struct NetworkSpec {
  int p = 0;                                 // controller count
  std::vector<double> delay_alpha;           // tau_i ~ Uniform[0, alpha_i * T]
  std::vector<double> p_sc;                  // sensor -> controller i
  std::vector<double> p_ca;                  // controller i -> actuator
  std::vector<std::vector<double>> p_link;   // p_link[i][m]: m -> i exchange
  InfoMode info_mode = InfoMode::kPerfect;

  void validate(int plant_p) const;
};

}  // namespace netlqg
