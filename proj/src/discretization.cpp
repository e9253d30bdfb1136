#include "netlqg/discretization.hpp"

#include <string>

namespace netlqg {

DiscreteStep discretize(const PlantSpec& plant, int i, double tau) {
  if (i < 0 || i >= plant.p()) {
    throw std::invalid_argument("discretize: controller index " + std::to_string(i) +
                                " out of range");
  }
  if (!(tau >= 0.0) || !(tau <= plant.T)) {
    throw std::invalid_argument("discretize: tau=" + std::to_string(tau) +
                                " outside [0, T]");
  }
  DiscreteStep step;
  step.tau = tau;
  step.Phi = matrix_exponential(plant.A * plant.T);
  step.Gamma0 = exp_integral(plant.A, 0.0, plant.T - tau, plant.B[i]);
  step.Gamma1 = exp_integral(plant.A, plant.T - tau, plant.T, plant.B[i]);
  return step;
}

PlantDiscretizer::PlantDiscretizer(const PlantSpec& plant) : T_(plant.T), B_(plant.B) {
  plant.validate();
  const Eigen::Index n = plant.A.rows();
  W_ = Matrix::Zero(2 * n, 2 * n);
  W_.topLeftCorner(n, n) = plant.A;
  W_.topRightCorner(n, n) = Matrix::Identity(n, n);
  Phi_ = matrix_exponential(plant.A * plant.T);
  JT_ = matrix_exponential(W_ * plant.T).topRightCorner(n, n);
}

DiscreteStep PlantDiscretizer::step(int i, double tau) const {
  if (i < 0 || i >= static_cast<int>(B_.size())) {
    throw std::invalid_argument("discretize: controller index " + std::to_string(i) +
                                " out of range");
  }
  if (!(tau >= 0.0) || !(tau <= T_)) {
    throw std::invalid_argument("discretize: tau=" + std::to_string(tau) +
                                " outside [0, T]");
  }
  const Eigen::Index n = Phi_.rows();
  DiscreteStep step;
  step.tau = tau;
  step.Phi = Phi_;
  const Matrix Jt = matrix_exponential(W_ * (T_ - tau)).topRightCorner(n, n);
  step.Gamma0 = Jt * B_[i];
  step.Gamma1 = (JT_ - Jt) * B_[i];
  return step;
}

BetaSet build_beta(const DiscreteStep& step, const std::vector<std::uint8_t>& theta,
                   int k) {
  if (k < 0) throw std::invalid_argument("build_beta: k must be non-negative");
  if (static_cast<int>(theta.size()) != k + 1) {
    throw std::invalid_argument("build_beta: need k + 1 delivery flags, got " +
                                std::to_string(theta.size()));
  }
  BetaSet out;
  out.beta.resize(k + 1);
  // Lag j weight: [ Gamma0 * prod_{l=k-j+1..k}(1 - theta_l)
  //              + Gamma1 * prod_{l=k-j+1..k-1}(1 - theta_l) ] * theta_{k-j}.
  // run0 and run1 carry those two running products of (1 - theta).
  double run0 = 1.0;  // over l = k-j+1 .. k
  double run1 = 1.0;  // over l = k-j+1 .. k-1
  for (int j = 0; j <= k; ++j) {
    if (j == 0) {
      out.beta[0] = step.Gamma0 * static_cast<double>(theta[k]);
      continue;
    }
    if (j == 1) {
      run0 = 1.0 - static_cast<double>(theta[k]);
    } else {
      const double miss = 1.0 - static_cast<double>(theta[k - j + 1]);
      run0 *= miss;
      run1 *= miss;
    }
    const double hit = static_cast<double>(theta[k - j]);
    if (hit == 0.0 || (run0 == 0.0 && run1 == 0.0)) {
      out.beta[j] = Matrix::Zero(step.Gamma0.rows(), step.Gamma0.cols());
    } else {
      out.beta[j] = (step.Gamma0 * run0 + step.Gamma1 * run1) * hit;
    }
  }
  return out;
}

}  // namespace netlqg
