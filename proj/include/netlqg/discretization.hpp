#pragma once

#include <cstdint>
#include <vector>

#include "netlqg/types.hpp"

namespace netlqg {

// One controller's exact discretization of the sampled plant for a given
// within-period delay tau in [0, T]. During [kT, kT + tau) the actuator is
// still driving the previously held input, so the step splits into two
// input matrices:
//   x_{k+1} = Phi x_k + Gamma0 * u_applied_k + Gamma1 * u_applied_{k-1}
//   Phi    = e^{AT}
//   Gamma0 = (integral_0^{T-tau} e^{As} ds) B_i
//   Gamma1 = (integral_{T-tau}^T e^{As} ds) B_i
// Gamma0 + Gamma1 is delay-independent; tau = 0 zeroes Gamma1, tau = T
// zeroes Gamma0 (the full period still runs on the held input).
struct DiscreteStep {
  Matrix Phi;
  Matrix Gamma0;
  Matrix Gamma1;
  double tau = 0.0;
};

// Discretize controller i's channel for a concrete delay. Throws
// std::invalid_argument for i out of range or tau outside [0, T].
DiscreteStep discretize(const PlantSpec& plant, int i, double tau);

// Caches e^{AT} and J(T) = integral_0^T e^{As} ds so that repeated
// per-delay discretizations cost one matrix exponential each instead of
// three. step(i, tau) returns exactly the same numbers as
// discretize(plant, i, tau), bit for bit: both paths evaluate the same
// exponentials and the same difference product for Gamma1.
class PlantDiscretizer {
 public:
  explicit PlantDiscretizer(const PlantSpec& plant);

  DiscreteStep step(int i, double tau) const;
  const Matrix& Phi() const { return Phi_; }

 private:
  double T_ = 0.0;
  std::vector<Matrix> B_;
  Matrix W_;    // augmented block matrix [[A, I], [0, 0]]
  Matrix Phi_;  // e^{AT}
  Matrix JT_;   // J(T)
};

// Input-history weights for one controller at step k under a realized
// delivery history. theta[j] is 1 when the control issued at step j
// reached the actuator (both network hops succeeded). Expanding the
// hold logic, the applied inputs become a combination of issued controls:
//   Gamma0 u_applied_k + Gamma1 u_applied_{k-1} = sum_j beta[j] u_{k-j}
// At most two lags are nonzero for any realization: lag 0 when theta_k = 1,
// and the lag of the most recent earlier delivery.
struct BetaSet {
  std::vector<Matrix> beta;  // beta[j] multiplies u_{i,k-j}, j = 0..k
};

// theta holds theta_{i,0} .. theta_{i,k} (size k + 1). Controls before
// step 0 are zero, so histories with no delivery yield all-zero weights.
BetaSet build_beta(const DiscreteStep& step, const std::vector<std::uint8_t>& theta,
                   int k);

}  // namespace netlqg
