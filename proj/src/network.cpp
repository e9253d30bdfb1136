#include "netlqg/network.hpp"

#include "netlqg/rng.hpp"

namespace netlqg {

ScenarioRealization sample_scenario(const PlantSpec& plant,
                                    const NetworkSpec& network,
                                    std::uint64_t seed) {
  plant.validate();
  network.validate(plant.p());
  const int N = plant.N;
  const int p = plant.p();

  ScenarioRealization r;
  r.N = N;
  r.p = p;
  r.tau.assign(N, std::vector<double>(p, 0.0));
  r.theta_sc.assign(N, std::vector<std::uint8_t>(p, 0));
  r.theta_ca.assign(N, std::vector<std::uint8_t>(p, 0));
  r.theta.assign(N, std::vector<std::uint8_t>(p, 0));
  r.theta_link.assign(
      N, std::vector<std::vector<std::uint8_t>>(p, std::vector<std::uint8_t>(p, 0)));

  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < p; ++i) {
      r.tau[k][i] = network.delay_alpha[i] * plant.T *
                    rng::keyed_uniform(seed, rng::kScenarioTau, k, i, 0);
      const bool sc =
          rng::keyed_bernoulli(network.p_sc[i], seed, rng::kScenarioSc, k, i, 0);
      const bool ca =
          rng::keyed_bernoulli(network.p_ca[i], seed, rng::kScenarioCa, k, i, 0);
      r.theta_sc[k][i] = sc;
      r.theta_ca[k][i] = ca;
      r.theta[k][i] = sc && ca;
      for (int m = 0; m < p; ++m) {
        r.theta_link[k][i][m] = rng::keyed_bernoulli(
            network.p_link[i][m], seed, rng::kScenarioLink, k, i, m);
      }
    }
  }
  return r;
}

namespace {

// Running mean that stays exact for constant inputs: the update adds
// (x - mean) / n, which is exactly zero once the mean has locked on.
struct Mean {
  double m = 0.0;
  long n = 0;
  void add(double x) {
    ++n;
    m += (x - m) / static_cast<double>(n);
  }
};

}  // namespace

RateSummary empirical_rates(const std::vector<ScenarioRealization>& runs) {
  if (runs.empty()) {
    throw std::invalid_argument("empirical_rates: need at least one realization");
  }
  const int p = runs.front().p;
  for (const auto& r : runs) {
    if (r.p != p) {
      throw std::invalid_argument("empirical_rates: mixed controller counts");
    }
  }

  std::vector<Mean> sc(p), ca(p), e2e(p), dmean(p), d2(p);
  std::vector<std::vector<Mean>> link(p, std::vector<Mean>(p));
  long count = 0;
  for (const auto& r : runs) {
    for (int k = 0; k < r.N; ++k) {
      ++count;
      for (int i = 0; i < p; ++i) {
        sc[i].add(r.theta_sc[k][i]);
        ca[i].add(r.theta_ca[k][i]);
        e2e[i].add(r.theta[k][i]);
        dmean[i].add(r.tau[k][i]);
        d2[i].add(r.tau[k][i] * r.tau[k][i]);
        for (int m = 0; m < p; ++m) link[i][m].add(r.theta_link[k][i][m]);
      }
    }
  }

  RateSummary out;
  out.count = count;
  out.sc_rate.resize(p);
  out.ca_rate.resize(p);
  out.end_to_end_rate.resize(p);
  out.delay_mean.resize(p);
  out.delay_var.resize(p);
  out.link_rate.assign(p, std::vector<double>(p, 0.0));
  for (int i = 0; i < p; ++i) {
    out.sc_rate[i] = sc[i].m;
    out.ca_rate[i] = ca[i].m;
    out.end_to_end_rate[i] = e2e[i].m;
    out.delay_mean[i] = dmean[i].m;
    out.delay_var[i] = d2[i].m - dmean[i].m * dmean[i].m;
    for (int m = 0; m < p; ++m) out.link_rate[i][m] = link[i][m].m;
  }
  return out;
}

}  // namespace netlqg
