#include "netlqg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace netlqg {

namespace {

std::string step_tag(int k, int i) {
  return "step " + std::to_string(k) + ", controller " + std::to_string(i);
}

Matrix negative_gain_assembly(const Coefficients& coeffs, int i,
                              const AugmentedLayout& lay) {
  Matrix L = Matrix::Zero(lay.K, lay.dim());
  L.leftCols(lay.M) = -coeffs.A[i];
  for (int m = 0; m < lay.p; ++m) {
    for (int n = 1; n <= lay.k; ++n) {
      L.block(0, lay.history_offset(m, n), lay.K, lay.K) = -coeffs.alpha[i][m][n - 1];
    }
  }
  return L;
}

std::vector<Matrix> terminal_value(const PlantSpec& plant) {
  const int dim = plant.M() + plant.p() * plant.N * plant.K();
  Matrix S = Matrix::Zero(dim, dim);
  S.topLeftCorner(plant.M(), plant.M()) = plant.Q_N;
  return std::vector<Matrix>(plant.p(), S);
}

}  // namespace

Coefficients solve_coefficients(const MomentSet& ms) {
  const AugmentedLayout& lay = ms.layout;
  const int p = lay.p, M = lay.M, K = lay.K, k = ms.k;
  const int dim = lay.dim();

  for (int i = 0; i < p; ++i) {
    if (!(ms.sigma[i] > 0.0)) {
      throw SolverError("solve_coefficients: own-state availability probability of controller " +
                        std::to_string(i) +
                        " is zero; imperfect-mode coefficients are unidentifiable");
    }
    for (int m = 0; m < p; ++m) {
      if (k > 0 && !(ms.pi[i][m] > 0.0)) {
        throw SolverError("solve_coefficients: history availability probability (" +
                          std::to_string(i) + ", " + std::to_string(m) +
                          ") is zero; imperfect-mode coefficients are unidentifiable");
      }
    }
  }

  Matrix base(p * K, p * K);
  for (int i = 0; i < p; ++i) {
    for (int l = 0; l < p; ++l) {
      base.block(i * K, l * K, K, K) = (i == l) ? ms.G[i] : ms.Y[i][l];
    }
  }
  Matrix rhs(p * K, dim);
  for (int i = 0; i < p; ++i) rhs.middleRows(i * K, K) = ms.rhs[i];

  const Eigen::PartialPivLU<Matrix> lu(base);
  const double rc = lu.rcond();
  if (!(rc > 1e-12)) {
    throw SolverError("solve_coefficients: stacked system near-singular at step " +
                      std::to_string(k) + " (reciprocal condition " + std::to_string(rc) +
                      ")");
  }
  const Matrix primed = lu.solve(-rhs);

  Coefficients out;
  out.k = k;
  out.primed.resize(p);
  out.A.resize(p);
  out.alpha.assign(p, std::vector<std::vector<Matrix>>(p, std::vector<Matrix>(k)));
  for (int i = 0; i < p; ++i) {
    out.primed[i] = primed.middleRows(i * K, K);
    out.A[i] = out.primed[i].leftCols(M) / ms.sigma[i];
    for (int m = 0; m < p; ++m) {
      for (int n = 1; n <= k; ++n) {
        out.alpha[i][m][n - 1] =
            out.primed[i].middleCols(lay.history_offset(m, n), K) / ms.pi[i][m];
      }
    }
  }
  return out;
}

StepResult riccati_step(const PlantSpec& plant, int k, const std::vector<Matrix>& S_next,
                        const Coefficients& coeffs, const MomentSet& ms) {
  if (k != ms.k || k != coeffs.k) {
    throw std::invalid_argument("riccati_step: step index mismatch");
  }
  const AugmentedLayout& lay = ms.layout;
  const int p = lay.p, M = lay.M;

  std::vector<Matrix> ecsc = expected_csc(ms, coeffs.A, coeffs.alpha, S_next);

  StepResult out;
  out.L.resize(p);
  out.S.resize(p);
  out.min_eigenvalue.resize(p);
  out.asymmetry.resize(p);
  for (int i = 0; i < p; ++i) {
    Matrix S = std::move(ecsc[i]);
    S.topLeftCorner(M, M) += plant.Q_1;
    S.noalias() -= coeffs.primed[i].transpose() * (ms.G[i] * coeffs.primed[i]);
    out.asymmetry[i] = (S - S.transpose()).cwiseAbs().maxCoeff();
    symmetrize(S);

    const Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lmin < -1e-8 * norm) {
      throw SolverError("riccati_step: value matrix lost positive semidefiniteness at " +
                        step_tag(k, i) + " (min eigenvalue " + std::to_string(lmin) +
                        ", scale " + std::to_string(norm) + ")");
    }
    out.min_eigenvalue[i] = lmin;
    out.S[i] = std::move(S);
    out.L[i] = negative_gain_assembly(coeffs, i, lay);
  }
  return out;
}

void GainSchedule::validate() const {
  const auto fail = [](const std::string& what) {
    throw std::invalid_argument("GainSchedule: " + what);
  };
  if (M < 1 || K < 1 || p < 1 || N < 1) fail("dimensions must be positive");
  if (static_cast<int>(sigma.size()) != p) fail("sigma must have p entries");
  if (static_cast<int>(pi.size()) != p) fail("pi must be p x p");
  for (const auto& row : pi) {
    if (static_cast<int>(row.size()) != p) fail("pi must be p x p");
  }
  if (static_cast<int>(L.size()) != p || static_cast<int>(A.size()) != p ||
      static_cast<int>(alpha.size()) != p) {
    fail("need per-controller L, A, alpha");
  }
  for (int i = 0; i < p; ++i) {
    if (static_cast<int>(L[i].size()) != N || static_cast<int>(A[i].size()) != N ||
        static_cast<int>(alpha[i].size()) != N) {
      fail("need one entry per step");
    }
    for (int k = 0; k < N; ++k) {
      const AugmentedLayout lay{M, K, p, k};
      if (L[i][k].rows() != K || L[i][k].cols() != lay.dim()) {
        fail("gain at step " + std::to_string(k) + " must be K x (M + pkK)");
      }
      if (A[i][k].rows() != K || A[i][k].cols() != M) fail("state block must be K x M");
      if (static_cast<int>(alpha[i][k].size()) != p) fail("alpha must be indexed [m][n-1]");
      Matrix reassembled = Matrix::Zero(K, lay.dim());
      reassembled.leftCols(M) = -A[i][k];
      for (int m = 0; m < p; ++m) {
        if (static_cast<int>(alpha[i][k][m].size()) != k) {
          fail("alpha at step " + std::to_string(k) + " needs k lag blocks");
        }
        for (int n = 1; n <= k; ++n) {
          const Matrix& al = alpha[i][k][m][n - 1];
          if (al.rows() != K || al.cols() != K) fail("alpha blocks must be K x K");
          reassembled.block(0, lay.history_offset(m, n), K, K) = -al;
        }
      }
      if (!(reassembled.array() == L[i][k].array()).all()) {
        fail("gain at step " + std::to_string(k) +
             " is not the negative assembly of its blocks");
      }
    }
  }
}

GameSolution solve_game(const PlantSpec& plant, const NetworkSpec& network, int n_samples,
                        std::uint64_t seed, InfoMode mode, const SolveOptions& options) {
  plant.validate();
  network.validate(plant.p());
  const int p = plant.p(), M = plant.M(), K = plant.K(), N = plant.N;

  const MomentEngine engine(plant, network, mode, n_samples, seed);

  GameSolution sol;
  GainSchedule& sched = sol.schedule;
  sched.mode = mode;
  sched.M = M;
  sched.K = K;
  sched.p = p;
  sched.N = N;
  sched.n_samples = n_samples;
  sched.seed = seed;
  sched.sigma.assign(p, 1.0);
  sched.pi.assign(p, std::vector<double>(p, 1.0));
  if (mode == InfoMode::kImperfect) {
    sched.sigma = network.p_sc;
    sched.pi = network.p_link;
  }
  sched.L.assign(p, std::vector<Matrix>(N));
  sched.A.assign(p, std::vector<Matrix>(N));
  sched.alpha.assign(p, std::vector<std::vector<std::vector<Matrix>>>(N));

  sol.min_eigenvalue.assign(p, std::vector<double>(N + 1, 0.0));
  sol.asymmetry.assign(p, std::vector<double>(N, 0.0));
  if (options.keep_value_matrices) sol.S.assign(p, std::vector<Matrix>(N + 1));

  std::vector<Matrix> S_cur = terminal_value(plant);
  for (int i = 0; i < p; ++i) {
    sol.min_eigenvalue[i][N] = min_symmetric_eigenvalue(S_cur[i]);
    if (options.keep_value_matrices) sol.S[i][N] = S_cur[i];
  }

  for (int k = N - 1; k >= 0; --k) {
    const MomentSet ms = engine.estimate(k, S_cur);
    const Coefficients coeffs = solve_coefficients(ms);
    StepResult step = riccati_step(plant, k, S_cur, coeffs, ms);
    for (int i = 0; i < p; ++i) {
      sched.L[i][k] = std::move(step.L[i]);
      sched.A[i][k] = coeffs.A[i];
      sched.alpha[i][k] = coeffs.alpha[i];
      sol.min_eigenvalue[i][k] = step.min_eigenvalue[i];
      sol.asymmetry[i][k] = step.asymmetry[i];
      if (options.keep_value_matrices) sol.S[i][k] = step.S[i];
    }
    S_cur = std::move(step.S);
  }

  sol.S0.resize(p);
  sol.predicted_cost.resize(p);
  for (int i = 0; i < p; ++i) {
    sol.S0[i] = S_cur[i];
    sol.predicted_cost[i] = plant.x0.dot(S_cur[i] * plant.x0);
  }
  return sol;
}

GameSolution single_controller_gains(const PlantSpec& plant, const NetworkSpec& network,
                                     int n_samples, std::uint64_t seed, InfoMode mode) {
  if (plant.p() != 1) {
    throw std::invalid_argument("single_controller_gains: plant must have exactly one controller");
  }
  return solve_game(plant, network, n_samples, seed, mode);
}

ConvergedGains converged_gains(const PlantSpec& plant, const NetworkSpec& network,
                               int N_large, double tol, InfoMode mode, int n_samples,
                               std::uint64_t seed, int lag_cap) {
  if (N_large < 1) throw std::invalid_argument("converged_gains: N_large must be >= 1");
  if (lag_cap < 0) throw std::invalid_argument("converged_gains: lag_cap must be >= 0");
  PlantSpec horizon = plant;
  horizon.N = N_large;
  const GameSolution sol = solve_game(horizon, network, n_samples, seed, mode);
  const GainSchedule& sched = sol.schedule;
  const int p = sched.p;

  const auto max_row_sum = [](const Matrix& X) {
    return X.rows() == 0 ? 0.0 : X.cwiseAbs().rowwise().sum().maxCoeff();
  };

  double best_residual = std::numeric_limits<double>::infinity();
  int best_k = N_large - 1;
  for (int k = N_large - 1; k >= 0; --k) {
    double resid = std::numeric_limits<double>::infinity();
    if (k < N_large - 1) {
      resid = 0.0;
      for (int i = 0; i < p; ++i) {
        resid = std::max(resid, max_row_sum(sched.A[i][k] - sched.A[i][k + 1]));
        const int lags = std::min(lag_cap, k);
        for (int m = 0; m < p; ++m) {
          for (int n = 1; n <= lags; ++n) {
            resid = std::max(resid, max_row_sum(sched.alpha[i][k][m][n - 1] -
                                                sched.alpha[i][k + 1][m][n - 1]));
          }
        }
      }
    }
    if (resid < best_residual) {
      best_residual = resid;
      best_k = k;
    }
    if (resid <= tol) {
      ConvergedGains out;
      out.k = k;
      out.residual = resid;
      out.lag_cap = lag_cap;
      out.A.resize(p);
      out.alpha.assign(p, std::vector<std::vector<Matrix>>(p));
      for (int i = 0; i < p; ++i) {
        out.A[i] = sched.A[i][k];
        const int lags = std::min(lag_cap, k);
        for (int m = 0; m < p; ++m) {
          out.alpha[i][m].assign(sched.alpha[i][k][m].begin(),
                                 sched.alpha[i][k][m].begin() + lags);
        }
      }
      return out;
    }
  }
  throw ConvergenceError("converged_gains: no step within tolerance " + std::to_string(tol) +
                         " over horizon " + std::to_string(N_large) + "; best residual " +
                         std::to_string(best_residual) + " at step " +
                         std::to_string(best_k));
}

GainSchedule make_stationary_schedule(const ConvergedGains& gains, const PlantSpec& plant,
                                      const NetworkSpec& network, InfoMode mode, int N) {
  if (N < 1) throw std::invalid_argument("make_stationary_schedule: N must be >= 1");
  const int p = plant.p(), M = plant.M(), K = plant.K();
  if (static_cast<int>(gains.A.size()) != p) {
    throw std::invalid_argument("make_stationary_schedule: controller count mismatch");
  }
  GainSchedule sched;
  sched.mode = mode;
  sched.M = M;
  sched.K = K;
  sched.p = p;
  sched.N = N;
  sched.sigma.assign(p, 1.0);
  sched.pi.assign(p, std::vector<double>(p, 1.0));
  if (mode == InfoMode::kImperfect) {
    sched.sigma = network.p_sc;
    sched.pi = network.p_link;
  }
  sched.L.assign(p, std::vector<Matrix>(N));
  sched.A.assign(p, std::vector<Matrix>(N));
  sched.alpha.assign(p, std::vector<std::vector<std::vector<Matrix>>>(N));
  for (int i = 0; i < p; ++i) {
    for (int k = 0; k < N; ++k) {
      const AugmentedLayout lay{M, K, p, k};
      sched.A[i][k] = gains.A[i];
      sched.alpha[i][k].assign(p, std::vector<Matrix>(k, Matrix(Matrix::Zero(K, K))));
      for (int m = 0; m < p; ++m) {
        const int avail = static_cast<int>(gains.alpha[i][m].size());
        for (int n = 1; n <= std::min(k, avail); ++n) {
          sched.alpha[i][k][m][n - 1] = gains.alpha[i][m][n - 1];
        }
      }
      Matrix L = Matrix::Zero(K, lay.dim());
      L.leftCols(M) = -sched.A[i][k];
      for (int m = 0; m < p; ++m) {
        for (int n = 1; n <= k; ++n) {
          L.block(0, lay.history_offset(m, n), K, K) = -sched.alpha[i][k][m][n - 1];
        }
      }
      sched.L[i][k] = std::move(L);
    }
  }
  return sched;
}

CDPair assemble_CD(const Matrix& Phi, const Coefficients& coeffs, const BetaSample& sample,
                   const AugmentedLayout& lay, const InfoSwitches* switches) {
  const int p = lay.p, M = lay.M, K = lay.K, k = lay.k;
  const int dim = lay.dim(), dimn = lay.next_dim();
  if (sample.k != k || coeffs.k != k) {
    throw std::invalid_argument("assemble_CD: step index mismatch");
  }
  if (Phi.rows() != M || Phi.cols() != M) {
    throw std::invalid_argument("assemble_CD: Phi must be M x M");
  }
  if (static_cast<int>(sample.beta.size()) != p ||
      static_cast<int>(coeffs.A.size()) != p) {
    throw std::invalid_argument("assemble_CD: controller count mismatch");
  }
  if (switches != nullptr) {
    if (static_cast<int>(switches->sc.size()) != p ||
        static_cast<int>(switches->link.size()) != p) {
      throw std::invalid_argument("assemble_CD: switch set must cover p controllers");
    }
    for (int l = 0; l < p; ++l) {
      if (static_cast<int>(switches->link[l].size()) != p) {
        throw std::invalid_argument("assemble_CD: link switches must be p x p");
      }
      for (int m = 0; m < p; ++m) {
        if (static_cast<int>(switches->link[l][m].size()) != k) {
          throw std::invalid_argument("assemble_CD: link switches need k lag entries");
        }
      }
    }
  }

  // Realized feedback rows u_{l,k} = row_l z_k, masked by the switches.
  std::vector<Matrix> row(p);
  for (int l = 0; l < p; ++l) {
    Matrix r = Matrix::Zero(K, dim);
    const double sc = (switches != nullptr) ? static_cast<double>(switches->sc[l]) : 1.0;
    r.leftCols(M) = sc * coeffs.A[l];
    for (int m = 0; m < p; ++m) {
      for (int n = 1; n <= k; ++n) {
        const double link =
            (switches != nullptr) ? static_cast<double>(switches->link[l][m][n - 1]) : 1.0;
        if (link != 0.0) {
          r.block(0, lay.history_offset(m, n), K, K) = coeffs.alpha[l][m][n - 1];
        }
      }
    }
    row[l] = std::move(r);
  }

  CDPair out;
  out.C.resize(p);
  out.D.resize(p);
  for (int i = 0; i < p; ++i) {
    Matrix C = Matrix::Zero(dimn, dim);
    C.block(0, 0, M, M) = Phi;
    for (int l = 0; l < p; ++l) {
      if (l == i) continue;
      C.topRows(M).noalias() += sample.beta[l].beta[0] * row[l];
      C.middleRows(M + l * K, K) = row[l];
    }
    for (int m = 0; m < p; ++m) {
      for (int n = 1; n <= k; ++n) {
        C.block(0, lay.history_offset(m, n), M, K) += sample.beta[m].beta[n];
      }
    }
    if (k > 0) {
      C.block(M + p * K, M, dim - M, dim - M) =
          Matrix::Identity(dim - M, dim - M);
    }
    Matrix D = Matrix::Zero(dimn, K);
    D.topRows(M) = sample.beta[i].beta[0];
    D.block(M + i * K, 0, K, K) = Matrix::Identity(K, K);
    out.C[i] = std::move(C);
    out.D[i] = std::move(D);
  }
  return out;
}

}  // namespace netlqg
