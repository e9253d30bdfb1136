#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "netlqg/layout.hpp"
#include "netlqg/rng.hpp"
#include "netlqg/simulator.hpp"
#include "netlqg/solver.hpp"
#include "netlqg/types.hpp"

using netlqg::EmissionPolicy;
using netlqg::GainSchedule;
using netlqg::GameSolution;
using netlqg::InfoMode;
using netlqg::Matrix;
using netlqg::NetworkSpec;
using netlqg::PlantSpec;
using netlqg::SimulationTrace;
using netlqg::Vector;

namespace {

PlantSpec generic_plant(int N = 20) {
  PlantSpec p;
  p.A = Matrix{{0.0, 1.0}, {-3.0, -4.0}};
  p.B = {Matrix{{0.0}, {1.0}}, Matrix{{1.0}, {0.5}}};
  p.T = 0.05;
  p.N = N;
  const double r35 = std::sqrt(35.0);
  p.Q_N = 80.0 * Matrix{{35.0, r35}, {r35, 1.0}};
  p.Q_1 = p.Q_N;
  p.R = {Matrix{{10.0}}, Matrix{{10.0}}};
  p.x0 = netlqg::Vector{{0.2, 0.1}};
  return p;
}

NetworkSpec uniform_net(int p, double alpha, double prob, InfoMode mode = InfoMode::kPerfect) {
  NetworkSpec n;
  n.p = p;
  n.delay_alpha.assign(p, alpha);
  n.p_sc.assign(p, prob);
  n.p_ca.assign(p, prob);
  n.p_link.assign(p, std::vector<double>(p, prob));
  for (int i = 0; i < p; ++i) n.p_link[i][i] = 1.0;
  n.info_mode = mode;
  return n;
}

// Stacked [x; issued history, newest first] as the gains expect it.
Vector stack_state(const SimulationTrace& tr, int k) {
  const netlqg::AugmentedLayout lay{tr.M, tr.K, tr.p, k};
  Vector z = Vector::Zero(lay.dim());
  z.head(tr.M) = tr.x[k];
  for (int n = 1; n <= k; ++n) {
    for (int m = 0; m < tr.p; ++m) {
      z.segment(lay.history_offset(m, n), tr.K) = tr.u[m][k - n];
    }
  }
  return z;
}

}  // namespace

TEST_CASE("step_plant applies the zero-order hold exactly") {
  const PlantSpec p = generic_plant();
  std::vector<netlqg::DiscreteStep> steps = {netlqg::discretize(p, 0, 0.02),
                                             netlqg::discretize(p, 1, 0.035)};
  const Vector x = Vector{{0.3, -0.1}};
  const std::vector<Vector> held = {Vector{{0.5}}, Vector{{-0.2}}};
  const std::vector<Vector> issued = {Vector{{1.0}}, Vector{{2.0}}};

  SUBCASE("both delivered") {
    const netlqg::PlantStep st = step_plant(steps, x, held, issued, {1, 1});
    Vector want = steps[0].Phi * x;
    for (int i = 0; i < 2; ++i) {
      want += steps[i].Gamma0 * issued[i] + steps[i].Gamma1 * held[i];
    }
    CHECK((st.x_next - want).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((st.applied[0] - issued[0]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((st.applied[1] - issued[1]).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("one lost: the actuator keeps the held input for the whole step") {
    const netlqg::PlantStep st = step_plant(steps, x, held, issued, {1, 0});
    Vector want = steps[0].Phi * x + steps[0].Gamma0 * issued[0] + steps[0].Gamma1 * held[0] +
                  (steps[1].Gamma0 + steps[1].Gamma1) * held[1];
    CHECK((st.x_next - want).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((st.applied[1] - held[1]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("episodes replay bit for bit under the same seed") {
  const PlantSpec p = generic_plant(15);
  const NetworkSpec n = uniform_net(2, 1.0, 0.9);
  const GameSolution sol = netlqg::solve_game(p, n, 800, 3, InfoMode::kPerfect);
  const SimulationTrace a = netlqg::run_episode(p, n, sol.schedule, 77);
  const SimulationTrace b = netlqg::run_episode(p, n, sol.schedule, 77);
  for (int k = 0; k <= p.N; ++k) {
    CHECK((a.x[k] - b.x[k]).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(a.J_joint == b.J_joint);
  const SimulationTrace c = netlqg::run_episode(p, n, sol.schedule, 78);
  CHECK(a.J_joint != c.J_joint);
}

TEST_CASE("trace invariants: hold chain, zero fill, emission flags") {
  const PlantSpec p = generic_plant(25);
  const NetworkSpec n = uniform_net(2, 1.0, 0.6);  // lossy enough to hit every branch
  const GameSolution sol = netlqg::solve_game(p, n, 600, 5, InfoMode::kPerfect);
  const SimulationTrace tr = netlqg::run_episode(p, n, sol.schedule, 11);

  for (int i = 0; i < 2; ++i) {
    Vector hold = Vector::Zero(1);
    for (int k = 0; k < p.N; ++k) {
      // Event-driven perfect mode: emit exactly when the sensor hop works.
      CHECK(tr.emitted[i][k] == tr.realization.theta_sc[k][i]);
      if (!tr.emitted[i][k]) {
        CHECK(tr.u[i][k].cwiseAbs().maxCoeff() == 0.0);  // zero-filled slot
      }
      if (tr.realization.theta[k][i]) {
        CHECK((tr.u_applied[i][k] - tr.u[i][k]).cwiseAbs().maxCoeff() == 0.0);
      } else {
        CHECK((tr.u_applied[i][k] - hold).cwiseAbs().maxCoeff() == 0.0);
      }
      hold = tr.u_applied[i][k];
    }
  }
}

TEST_CASE("issued controls follow the gains on the stacked state") {
  const PlantSpec p = generic_plant(12);
  const NetworkSpec n = uniform_net(2, 1.0, 0.8);
  const GameSolution sol = netlqg::solve_game(p, n, 600, 9, InfoMode::kPerfect);
  const SimulationTrace tr = netlqg::run_episode(p, n, sol.schedule, 21);
  for (int k = 0; k < p.N; ++k) {
    const Vector z = stack_state(tr, k);
    for (int i = 0; i < 2; ++i) {
      if (!tr.emitted[i][k]) continue;
      const Vector want = -(sol.schedule.L[i][k] * z);
      CHECK((tr.u[i][k] - want).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("realized costs recompute from the trace") {
  const PlantSpec p = generic_plant(18);
  const NetworkSpec n = uniform_net(2, 1.0, 0.75);
  const GameSolution sol = netlqg::solve_game(p, n, 600, 13, InfoMode::kPerfect);
  const SimulationTrace tr = netlqg::run_episode(p, n, sol.schedule, 31);

  double state_cost = (tr.x[p.N].transpose() * p.Q_N * tr.x[p.N])(0, 0);
  for (int k = 0; k < p.N; ++k) {
    state_cost += (tr.x[k].transpose() * p.Q_1 * tr.x[k])(0, 0);
  }
  std::vector<double> effort(2, 0.0);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < p.N; ++k) {
      effort[i] += (tr.u[i][k].transpose() * p.R[i] * tr.u[i][k])(0, 0);
    }
  }
  CHECK(tr.J_joint == doctest::Approx(state_cost + effort[0] + effort[1]).epsilon(1e-12));
  for (int i = 0; i < 2; ++i) {
    CHECK(tr.J[i] == doctest::Approx(state_cost + effort[i]).epsilon(1e-12));
  }
}

TEST_CASE("controller_emit masks the imperfect law by the realized switches") {
  const PlantSpec p = generic_plant(10);
  const NetworkSpec n = uniform_net(2, 1.0, 0.7, InfoMode::kImperfect);
  const GameSolution sol = netlqg::solve_game(p, n, 600, 15, InfoMode::kImperfect);
  const netlqg::ScenarioRealization r = netlqg::sample_scenario(p, n, 41);

  const int k = 3;
  const netlqg::AugmentedLayout lay{2, 1, 2, k};
  Vector z = Vector::Zero(lay.dim());
  for (int t = 0; t < z.size(); ++t) {
    z(t) = netlqg::rng::keyed_uniform(5, netlqg::rng::kTestStream, t, 0, 3) - 0.5;
  }
  for (int i = 0; i < 2; ++i) {
    const auto got = netlqg::controller_emit(i, k, z, sol.schedule, r);
    REQUIRE(got.has_value());  // imperfect controllers always emit
    Vector want = Vector::Zero(1);
    if (r.theta_sc[k][i]) want += sol.schedule.A[i][k] * z.head(2);
    for (int m = 0; m < 2; ++m) {
      for (int nn = 1; nn <= k; ++nn) {
        if (r.theta_link[k - nn][i][m]) {
          want += sol.schedule.alpha[i][k][m][nn - 1] * z.segment(lay.history_offset(m, nn), 1);
        }
      }
    }
    CHECK((*got - want).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("emission policy controls perfect-mode behavior on sensor loss") {
  const PlantSpec p = generic_plant(10);
  NetworkSpec n = uniform_net(2, 1.0, 0.9);
  n.p_sc = {0.0, 0.0};  // sensor hop never works
  const GameSolution sol =
      netlqg::solve_game(p, uniform_net(2, 1.0, 0.9), 500, 17, InfoMode::kPerfect);
  const netlqg::ScenarioRealization r = netlqg::sample_scenario(p, n, 9);
  const Vector z = Vector{{0.2, 0.1}};
  CHECK_FALSE(netlqg::controller_emit(0, 0, z, sol.schedule, r).has_value());
  const auto forced =
      netlqg::controller_emit(0, 0, z, sol.schedule, r, EmissionPolicy::kAlwaysEmit);
  REQUIRE(forced.has_value());
  CHECK((*forced + sol.schedule.L[0][0] * z).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("deterministic loop realizes exactly the predicted cost") {
  // Certain delivery, zero delay, single controller: the closed loop is
  // deterministic, so the realized episode cost must equal x0' S0 x0.
  PlantSpec p = generic_plant(25);
  p.B = {Matrix{{0.0}, {1.0}}};
  p.R = {Matrix{{10.0}}};
  const NetworkSpec n = uniform_net(1, 0.0, 1.0);
  const GameSolution sol = netlqg::solve_game(p, n, 128, 19, InfoMode::kPerfect);
  const SimulationTrace tr = netlqg::run_episode(p, n, sol.schedule, 99);
  CHECK(tr.J[0] == doctest::Approx(sol.predicted_cost[0]).epsilon(1e-10));
  CHECK(tr.J_joint == doctest::Approx(sol.predicted_cost[0]).epsilon(1e-10));
}

TEST_CASE("run_monte_carlo pairs runs across schedules and calls") {
  const PlantSpec p = generic_plant(12);
  const NetworkSpec n = uniform_net(2, 1.0, 0.85);
  const GameSolution sol = netlqg::solve_game(p, n, 700, 23, InfoMode::kPerfect);

  std::map<std::string, GainSchedule> two = {{"a", sol.schedule}, {"b", sol.schedule}};
  const auto sums = netlqg::run_monte_carlo(p, n, two, 16, 4242);
  REQUIRE(sums.size() == 2);
  CHECK(sums[0].name == "a");
  CHECK(sums[1].name == "b");
  REQUIRE(sums[0].joint_per_run.size() == 16);
  // Identical schedules see identical paired realizations.
  for (int r = 0; r < 16; ++r) {
    CHECK(sums[0].joint_per_run[r] == sums[1].joint_per_run[r]);
    CHECK(sums[0].run_seeds[r] == netlqg::rng::derive_seed(4242, r));
  }
  // Same (n_runs, seed) in a separate call keeps the pairing.
  const auto again = netlqg::run_monte_carlo(p, n, {{"solo", sol.schedule}}, 16, 4242);
  for (int r = 0; r < 16; ++r) {
    CHECK(again[0].joint_per_run[r] == sums[0].joint_per_run[r]);
  }

  // Summary statistics match a direct computation.
  double mean = 0.0;
  for (double v : sums[0].joint_per_run) mean += v;
  mean /= 16.0;
  double var = 0.0;
  for (double v : sums[0].joint_per_run) var += (v - mean) * (v - mean);
  var /= 15.0;
  CHECK(sums[0].joint_mean == doctest::Approx(mean).epsilon(1e-14));
  CHECK(sums[0].joint_std_error == doctest::Approx(std::sqrt(var / 16.0)).epsilon(1e-12));
}

TEST_CASE("run_monte_carlo validates its arguments") {
  const PlantSpec p = generic_plant(8);
  const NetworkSpec n = uniform_net(2, 1.0, 0.9);
  const GameSolution sol = netlqg::solve_game(p, n, 300, 25, InfoMode::kPerfect);
  CHECK_THROWS_AS(netlqg::run_monte_carlo(p, n, {}, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(netlqg::run_monte_carlo(p, n, {{"x", sol.schedule}}, 1, 1),
                  std::invalid_argument);
}

TEST_CASE("run_episode rejects a schedule solved for a different shape") {
  const PlantSpec p = generic_plant(8);
  const NetworkSpec n = uniform_net(2, 1.0, 0.9);
  const GameSolution sol = netlqg::solve_game(p, n, 300, 27, InfoMode::kPerfect);

  PlantSpec p3 = p;
  p3.B.push_back(Matrix{{1.0}, {1.0}});
  p3.R.push_back(Matrix{{1.0}});
  const NetworkSpec n3 = uniform_net(3, 1.0, 0.9);
  CHECK_THROWS_AS(netlqg::run_episode(p3, n3, sol.schedule, 1), std::invalid_argument);

  PlantSpec shorter = p;
  shorter.N = 6;  // schedule horizon >= plant horizon is fine
  CHECK_NOTHROW(netlqg::run_episode(shorter, n, sol.schedule, 1));
  PlantSpec longer = p;
  longer.N = 10;  // schedule too short
  CHECK_THROWS_AS(netlqg::run_episode(longer, n, sol.schedule, 1), std::invalid_argument);
}

TEST_CASE("closed loop keeps the state bounded on the benchmark") {
  const PlantSpec p = generic_plant(50);
  const NetworkSpec n = uniform_net(2, 1.0, 0.9);
  const GameSolution sol = netlqg::solve_game(p, n, 2000, 29, InfoMode::kPerfect);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const SimulationTrace tr = netlqg::run_episode(p, n, sol.schedule, 1000 + s);
    for (int k = 0; k <= p.N; ++k) {
      CHECK(tr.x[k].allFinite());
      CHECK(tr.x[k].cwiseAbs().maxCoeff() < 10.0);
    }
  }
}
