#include "netlqg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "netlqg/layout.hpp"
#include "netlqg/rng.hpp"

namespace netlqg {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard error of the mean, n-1 divisor.
double std_error_of(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) {
    const double d = x - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

std::optional<Vector> controller_emit(int i, int k, const Vector& z,
                                      const GainSchedule& schedule,
                                      const ScenarioRealization& realization,
                                      EmissionPolicy policy) {
  const int M = schedule.M;
  const int K = schedule.K;
  const int p = schedule.p;
  if (i < 0 || i >= p) {
    throw std::invalid_argument("controller_emit: controller index out of range");
  }
  if (k < 0 || k >= schedule.N) {
    throw std::invalid_argument("controller_emit: step " + std::to_string(k) +
                                " outside schedule horizon");
  }
  if (realization.p != p || k >= realization.N) {
    throw std::invalid_argument("controller_emit: realization does not cover step " +
                                std::to_string(k));
  }
  const AugmentedLayout layout{M, K, p, k};
  if (z.size() != layout.dim()) {
    throw std::invalid_argument("controller_emit: stacked state has size " +
                                std::to_string(z.size()) + ", step " +
                                std::to_string(k) + " needs " +
                                std::to_string(layout.dim()));
  }

  if (schedule.mode == InfoMode::kPerfect) {
    if (policy == EmissionPolicy::kEventDriven && realization.theta_sc[k][i] == 0) {
      return std::nullopt;
    }
    return Vector(-(schedule.L[i][k] * z));
  }

  // Imperfect information: every gain block is gated by its realized
  // switch. The sensor switch masks the state term; the exchange switch
  // for (m, n) is whether m's step k-n control reached controller i.
  Vector u = Vector::Zero(K);
  if (realization.theta_sc[k][i] != 0) {
    u.noalias() += schedule.A[i][k] * z.head(M);
  }
  for (int n = 1; n <= k; ++n) {
    for (int m = 0; m < p; ++m) {
      if (realization.theta_link[k - n][i][m] == 0) continue;
      u.noalias() +=
          schedule.alpha[i][k][m][n - 1] * z.segment(layout.history_offset(m, n), K);
    }
  }
  return u;
}

PlantStep step_plant(const std::vector<DiscreteStep>& steps, const Vector& x,
                     const std::vector<Vector>& held,
                     const std::vector<Vector>& issued,
                     const std::vector<std::uint8_t>& delivered) {
  const int p = static_cast<int>(steps.size());
  if (p == 0) {
    throw std::invalid_argument("step_plant: no controller discretizations given");
  }
  if (static_cast<int>(held.size()) != p || static_cast<int>(issued.size()) != p ||
      static_cast<int>(delivered.size()) != p) {
    throw std::invalid_argument("step_plant: per-controller argument counts disagree");
  }
  if (x.size() != steps[0].Phi.rows()) {
    throw std::invalid_argument("step_plant: state size does not match Phi");
  }

  PlantStep out;
  out.applied.resize(p);
  Vector x_next = steps[0].Phi * x;
  for (int i = 0; i < p; ++i) {
    out.applied[i] = delivered[i] ? issued[i] : held[i];
    x_next.noalias() += steps[i].Gamma0 * out.applied[i];
    x_next.noalias() += steps[i].Gamma1 * held[i];
  }
  out.x_next = std::move(x_next);
  return out;
}

SimulationTrace run_episode(const PlantSpec& plant, const NetworkSpec& network,
                            const GainSchedule& schedule, std::uint64_t seed,
                            EmissionPolicy policy) {
  plant.validate();
  network.validate(plant.p());
  schedule.validate();
  const int M = plant.M();
  const int K = plant.K();
  const int p = plant.p();
  const int N = plant.N;
  if (schedule.M != M || schedule.K != K || schedule.p != p) {
    throw std::invalid_argument("run_episode: schedule dimensions do not match plant");
  }
  if (schedule.N < N) {
    throw std::invalid_argument("run_episode: schedule covers " +
                                std::to_string(schedule.N) + " steps, plant needs " +
                                std::to_string(N));
  }

  SimulationTrace tr;
  tr.N = N;
  tr.M = M;
  tr.K = K;
  tr.p = p;
  tr.realization = sample_scenario(plant, network, seed);
  tr.x.resize(N + 1);
  tr.u.assign(p, std::vector<Vector>(N, Vector::Zero(K)));
  tr.emitted.assign(p, std::vector<std::uint8_t>(N, 0));
  tr.u_applied.assign(p, std::vector<Vector>(N, Vector::Zero(K)));
  tr.J.assign(p, 0.0);

  const PlantDiscretizer disc(plant);
  std::vector<Vector> held(p, Vector::Zero(K));
  std::vector<DiscreteStep> steps(p);
  Vector x = plant.x0;
  tr.x[0] = x;
  double joint = 0.0;

  for (int k = 0; k < N; ++k) {
    const AugmentedLayout layout{M, K, p, k};
    Vector z = Vector::Zero(layout.dim());
    z.head(M) = x;
    for (int n = 1; n <= k; ++n) {
      for (int m = 0; m < p; ++m) {
        z.segment(layout.history_offset(m, n), K) = tr.u[m][k - n];
      }
    }

    std::vector<Vector> issued(p, Vector::Zero(K));
    for (int i = 0; i < p; ++i) {
      const auto emission = controller_emit(i, k, z, schedule, tr.realization, policy);
      if (emission) {
        issued[i] = *emission;
        tr.u[i][k] = issued[i];
        tr.emitted[i][k] = 1;
      }
    }

    // Stage costs charge issued controls; a non-emission is a zero control.
    const double xq = x.dot(plant.Q_1 * x);
    joint += xq;
    for (int i = 0; i < p; ++i) {
      const double ur = issued[i].dot(plant.R[i] * issued[i]);
      joint += ur;
      tr.J[i] += xq + ur;
    }

    for (int i = 0; i < p; ++i) steps[i] = disc.step(i, tr.realization.tau[k][i]);
    const PlantStep st =
        step_plant(steps, x, held, issued, tr.realization.theta[k]);

    // Second path: expand the hold recursion over past issued controls
    // and check both updates agree. This runs on every simulated step.
    Vector x_beta = disc.Phi() * x;
    std::vector<std::uint8_t> hist(k + 1);
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j <= k; ++j) hist[j] = tr.realization.theta[j][i];
      const BetaSet bs = build_beta(steps[i], hist, k);
      for (int j = 0; j <= k; ++j) x_beta.noalias() += bs.beta[j] * tr.u[i][k - j];
    }
    const double scale = std::max(1.0, st.x_next.lpNorm<Eigen::Infinity>());
    if ((st.x_next - x_beta).lpNorm<Eigen::Infinity>() > 1e-12 * scale) {
      throw SolverError(
          "run_episode: hold-recursion and expansion state updates disagree at step " +
          std::to_string(k));
    }

    held = st.applied;
    for (int i = 0; i < p; ++i) tr.u_applied[i][k] = held[i];
    x = st.x_next;
    tr.x[k + 1] = x;
  }

  const double terminal = x.dot(plant.Q_N * x);
  joint += terminal;
  for (int i = 0; i < p; ++i) tr.J[i] += terminal;
  tr.J_joint = joint;
  return tr;
}

std::vector<CostSummary> run_monte_carlo(
    const PlantSpec& plant, const NetworkSpec& network,
    const std::map<std::string, GainSchedule>& schedules, int n_runs,
    std::uint64_t seed, EmissionPolicy policy) {
  if (schedules.empty()) {
    throw std::invalid_argument("run_monte_carlo: no schedules given");
  }
  if (n_runs < 2) {
    throw std::invalid_argument("run_monte_carlo: need at least 2 runs, got " +
                                std::to_string(n_runs));
  }
  const int p = plant.p();

  std::vector<CostSummary> out;
  out.reserve(schedules.size());
  for (const auto& [name, schedule] : schedules) {
    CostSummary s;
    s.name = name;
    s.runs = n_runs;
    s.joint_per_run.reserve(n_runs);
    s.run_seeds.reserve(n_runs);
    std::vector<std::vector<double>> per(p);
    for (int i = 0; i < p; ++i) per[i].reserve(n_runs);

    for (int r = 0; r < n_runs; ++r) {
      const std::uint64_t rs = rng::derive_seed(seed, static_cast<std::uint64_t>(r));
      const SimulationTrace tr = run_episode(plant, network, schedule, rs, policy);
      s.run_seeds.push_back(rs);
      s.joint_per_run.push_back(tr.J_joint);
      for (int i = 0; i < p; ++i) per[i].push_back(tr.J[i]);
    }

    s.mean.resize(p);
    s.std_error.resize(p);
    for (int i = 0; i < p; ++i) {
      s.mean[i] = mean_of(per[i]);
      s.std_error[i] = std_error_of(per[i], s.mean[i]);
    }
    s.joint_mean = mean_of(s.joint_per_run);
    s.joint_std_error = std_error_of(s.joint_per_run, s.joint_mean);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace netlqg
