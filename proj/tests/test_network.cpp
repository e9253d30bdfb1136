#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "netlqg/network.hpp"
#include "netlqg/types.hpp"

using netlqg::Matrix;
using netlqg::NetworkSpec;
using netlqg::PlantSpec;
using netlqg::ScenarioRealization;

namespace {

PlantSpec small_plant(int N = 20) {
  PlantSpec p;
  p.A = Matrix{{0.0, 1.0}, {-3.0, -4.0}};
  p.B = {Matrix{{0.0}, {1.0}}, Matrix{{1.0}, {0.5}}};
  p.T = 0.05;
  p.N = N;
  p.Q_N = Matrix::Identity(2, 2);
  p.Q_1 = Matrix::Identity(2, 2);
  p.R = {Matrix{{1.0}}, Matrix{{1.0}}};
  p.x0 = netlqg::Vector{{0.2, 0.1}};
  return p;
}

NetworkSpec rates_network(double psc, double pca, double plink, double alpha = 1.0) {
  NetworkSpec n;
  n.p = 2;
  n.delay_alpha = {alpha, alpha};
  n.p_sc = {psc, psc};
  n.p_ca = {pca, pca};
  n.p_link = {{1.0, plink}, {plink, 1.0}};
  return n;
}

}  // namespace

TEST_CASE("theta is the conjunction of the two hops on every sample") {
  const PlantSpec p = small_plant();
  const NetworkSpec n = rates_network(0.7, 0.6, 0.8);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ScenarioRealization r = netlqg::sample_scenario(p, n, seed);
    REQUIRE(r.N == p.N);
    REQUIRE(r.p == 2);
    for (int k = 0; k < r.N; ++k) {
      for (int i = 0; i < r.p; ++i) {
        CHECK(r.theta[k][i] == (r.theta_sc[k][i] && r.theta_ca[k][i] ? 1 : 0));
        CHECK(r.theta_link[k][i][i] == 1);
      }
    }
  }
}

TEST_CASE("delays stay inside the configured fraction of the period") {
  const PlantSpec p = small_plant();
  const NetworkSpec n = rates_network(0.9, 0.9, 0.9, 0.4);
  const ScenarioRealization r = netlqg::sample_scenario(p, n, 3);
  for (int k = 0; k < r.N; ++k) {
    for (int i = 0; i < r.p; ++i) {
      CHECK(r.tau[k][i] >= 0.0);
      CHECK(r.tau[k][i] <= 0.4 * p.T);
    }
  }
}

TEST_CASE("zero delay fraction pins every delay to zero") {
  const PlantSpec p = small_plant();
  const NetworkSpec n = rates_network(0.9, 0.9, 0.9, 0.0);
  const ScenarioRealization r = netlqg::sample_scenario(p, n, 5);
  for (int k = 0; k < r.N; ++k) {
    for (int i = 0; i < r.p; ++i) CHECK(r.tau[k][i] == 0.0);
  }
}

TEST_CASE("degenerate probabilities are exact, not approximate") {
  const PlantSpec p = small_plant();
  SUBCASE("all hops certain") {
    const NetworkSpec n = rates_network(1.0, 1.0, 1.0);
    const ScenarioRealization r = netlqg::sample_scenario(p, n, 7);
    for (int k = 0; k < r.N; ++k) {
      for (int i = 0; i < r.p; ++i) {
        CHECK(r.theta[k][i] == 1);
        CHECK(r.theta_link[k][i][1 - i] == 1);
      }
    }
  }
  SUBCASE("actuator hop never succeeds") {
    const NetworkSpec n = rates_network(1.0, 0.0, 1.0);
    const ScenarioRealization r = netlqg::sample_scenario(p, n, 7);
    for (int k = 0; k < r.N; ++k) {
      for (int i = 0; i < r.p; ++i) {
        CHECK(r.theta[k][i] == 0);
        CHECK(r.theta_sc[k][i] <= 1);
      }
    }
  }
}

TEST_CASE("same seed reproduces the realization, different seeds differ") {
  const PlantSpec p = small_plant();
  const NetworkSpec n = rates_network(0.9, 0.9, 0.9);
  const ScenarioRealization a = netlqg::sample_scenario(p, n, 42);
  const ScenarioRealization b = netlqg::sample_scenario(p, n, 42);
  const ScenarioRealization c = netlqg::sample_scenario(p, n, 43);
  bool same_ab = true, same_ac = true;
  for (int k = 0; k < p.N; ++k) {
    for (int i = 0; i < 2; ++i) {
      same_ab = same_ab && a.tau[k][i] == b.tau[k][i] && a.theta[k][i] == b.theta[k][i] &&
                a.theta_sc[k][i] == b.theta_sc[k][i] && a.theta_ca[k][i] == b.theta_ca[k][i];
      same_ac = same_ac && a.tau[k][i] == c.tau[k][i] && a.theta[k][i] == c.theta[k][i];
    }
  }
  CHECK(same_ab);
  CHECK_FALSE(same_ac);
}

TEST_CASE("empirical rates approach the configured probabilities") {
  // 0.9 per hop means 0.81 end to end; (3 standard errors of a Bernoulli
  // mean over n cells is 3 * sqrt(p(1-p)/n)).
  PlantSpec p = small_plant(50);
  const NetworkSpec n = rates_network(0.9, 0.9, 0.9);
  std::vector<ScenarioRealization> runs;
  const int n_runs = 2000;
  runs.reserve(n_runs);
  for (int s = 0; s < n_runs; ++s) runs.push_back(netlqg::sample_scenario(p, n, 1000 + s));
  const netlqg::RateSummary rs = netlqg::empirical_rates(runs);
  REQUIRE(rs.count == static_cast<long>(n_runs) * p.N);
  const double cells = static_cast<double>(rs.count);
  const double se_hop = std::sqrt(0.9 * 0.1 / cells);
  const double se_e2e = std::sqrt(0.81 * 0.19 / cells);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(rs.sc_rate[i] - 0.9) <= 3.0 * se_hop);
    CHECK(std::abs(rs.ca_rate[i] - 0.9) <= 3.0 * se_hop);
    CHECK(std::abs(rs.end_to_end_rate[i] - 0.81) <= 3.0 * se_e2e);
    CHECK(std::abs(rs.link_rate[i][1 - i] - 0.9) <= 3.0 * se_hop);
    CHECK(rs.link_rate[i][i] == 1.0);
  }
}

TEST_CASE("empirical delay moments match the uniform distribution") {
  // tau ~ U[0, alpha T]: mean alpha T / 2, variance (alpha T)^2 / 12.
  PlantSpec p = small_plant(50);
  const double alpha = 0.8;
  const NetworkSpec n = rates_network(0.9, 0.9, 0.9, alpha);
  std::vector<ScenarioRealization> runs;
  for (int s = 0; s < 1000; ++s) runs.push_back(netlqg::sample_scenario(p, n, 5000 + s));
  const netlqg::RateSummary rs = netlqg::empirical_rates(runs);
  const double hi = alpha * p.T;
  const double cells = static_cast<double>(rs.count);
  const double se_mean = std::sqrt(hi * hi / 12.0 / cells);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(rs.delay_mean[i] - 0.5 * hi) <= 3.0 * se_mean);
    CHECK(rs.delay_var[i] == doctest::Approx(hi * hi / 12.0).epsilon(0.05));
  }
}

TEST_CASE("network validation rejects malformed specs") {
  NetworkSpec n = rates_network(0.9, 0.9, 0.9);
  CHECK_NOTHROW(n.validate(2));
  SUBCASE("controller count mismatch") { CHECK_THROWS_AS(n.validate(3), std::invalid_argument); }
  SUBCASE("probability out of range") {
    n.p_sc[0] = 1.5;
    CHECK_THROWS_AS(n.validate(2), std::invalid_argument);
  }
  SUBCASE("delay fraction out of range") {
    n.delay_alpha[1] = 1.2;
    CHECK_THROWS_AS(n.validate(2), std::invalid_argument);
  }
  SUBCASE("own history must always be available") {
    n.p_link[0][0] = 0.5;
    CHECK_THROWS_AS(n.validate(2), std::invalid_argument);
  }
}
