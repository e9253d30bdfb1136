#include "netlqg/moments.hpp"

#include <cstddef>
#include <string>

#include "netlqg/rng.hpp"

namespace netlqg {

namespace {

// Mean accumulator over a fixed-length stream where most samples
// contribute an exact zero. Only nonzero samples are pushed: before each
// push the running mean is rescaled by the run of skipped zeros, and
// finalize() rescales by the zero tail. A cell that receives the same
// value at every sample index reproduces that value exactly, which keeps
// degenerate (deterministic) networks free of estimation noise.
class MeanGrid {
 public:
  MeanGrid(int cells, int len)
      : len_(len), m_(std::size_t(cells) * len, 0.0), last_(cells, 0) {}

  // s is the 1-based sample index; pushes must use increasing s per cell.
  void observe(int cell, long s, const double* x) {
    double* m = &m_[std::size_t(cell) * len_];
    long& last = last_[cell];
    if (s > 1 && last != s - 1) {
      const double decay = static_cast<double>(last) / static_cast<double>(s - 1);
      for (int t = 0; t < len_; ++t) m[t] *= decay;
    }
    const double inv = 1.0 / static_cast<double>(s);
    for (int t = 0; t < len_; ++t) m[t] += (x[t] - m[t]) * inv;
    last = s;
  }

  void finalize(long n) {
    for (std::size_t c = 0; c < last_.size(); ++c) {
      if (last_[c] == 0 || last_[c] == n) continue;
      const double scale = static_cast<double>(last_[c]) / static_cast<double>(n);
      double* m = &m_[c * len_];
      for (int t = 0; t < len_; ++t) m[t] *= scale;
    }
  }

  const double* cell(int c) const { return &m_[std::size_t(c) * len_]; }

 private:
  int len_ = 0;
  std::vector<double> m_;
  std::vector<long> last_;
};

int atom_of(int l, int j, int k) { return l * (k + 1) + j; }

}  // namespace

// Per-(sample, controller) draws in compact form. A realization of the
// input-history weights has at most two active lags: lag 0 when the
// current control is delivered, and the lag of the most recent earlier
// delivery (value Gamma1 if lag 0 fired, Gamma0 + Gamma1 otherwise).
// Storing the flags, that lag, and the delay-dependent Gamma blocks is
// enough to reconstruct every beta atom at every step k.
struct MomentEngine::Stream {
  PlantSpec plant;
  NetworkSpec network;
  InfoMode mode = InfoMode::kPerfect;
  int n_samples = 0;
  std::uint64_t seed = 0;
  int p = 0, M = 0, K = 0;

  Matrix Phi;
  std::vector<std::uint8_t> theta0;  // [s*p + i] end-to-end delivery at lag 0
  std::vector<std::uint8_t> sc0;     // [s*p + i] sensor hop at lag 0
  std::vector<int> jstar;            // [s*p + i] earliest earlier delivery; 0 = none
  std::vector<double> g0, g1, gs;    // [(s*p + i) * M*K], column-major blocks

  const double* blk(const std::vector<double>& v, long s, int i) const {
    return &v[(std::size_t(s) * p + i) * M * K];
  }
};

MomentEngine::MomentEngine(const PlantSpec& plant, const NetworkSpec& network,
                           InfoMode mode, int n_samples, std::uint64_t seed)
    : stream_(std::make_unique<Stream>()) {
  plant.validate();
  network.validate(plant.p());
  if (n_samples < 1) {
    throw std::invalid_argument("MomentEngine: n_samples must be >= 1");
  }
  Stream& st = *stream_;
  st.plant = plant;
  st.network = network;
  st.mode = mode;
  st.n_samples = n_samples;
  st.seed = seed;
  st.p = plant.p();
  st.M = plant.M();
  st.K = plant.K();

  PlantDiscretizer disc(plant);
  st.Phi = disc.Phi();

  const int p = st.p;
  const int MK = st.M * st.K;
  // Delivery flags are keyed by lag so a draw means the same thing at
  // every step; the backward recursion then sees one fixed sample stream
  // instead of fresh noise per step. Lags beyond N - 1 are never used.
  const int max_lag = plant.N - 1;
  const std::size_t cells = std::size_t(n_samples) * p;
  st.theta0.resize(cells);
  st.sc0.resize(cells);
  st.jstar.assign(cells, 0);
  st.g0.resize(cells * MK);
  st.g1.resize(cells * MK);
  st.gs.resize(cells * MK);

  for (long s = 0; s < n_samples; ++s) {
    for (int i = 0; i < p; ++i) {
      const std::size_t idx = std::size_t(s) * p + i;
      const double u = rng::keyed_uniform(seed, rng::kMomentTau, i, s, 0);
      const double tau = network.delay_alpha[i] * plant.T * u;
      const bool sc = rng::keyed_bernoulli(network.p_sc[i], seed, rng::kMomentSc, i, s, 0);
      const bool ca = rng::keyed_bernoulli(network.p_ca[i], seed, rng::kMomentCa, i, s, 0);
      st.sc0[idx] = sc ? 1 : 0;
      st.theta0[idx] = (sc && ca) ? 1 : 0;
      for (int d = 1; d <= max_lag; ++d) {
        const bool scd = rng::keyed_bernoulli(network.p_sc[i], seed, rng::kMomentSc, i, s, d);
        const bool cad = rng::keyed_bernoulli(network.p_ca[i], seed, rng::kMomentCa, i, s, d);
        if (scd && cad) {
          st.jstar[idx] = d;
          break;
        }
      }
      const DiscreteStep step = disc.step(i, tau);
      Eigen::Map<Matrix>(&st.g0[idx * MK], st.M, st.K) = step.Gamma0;
      Eigen::Map<Matrix>(&st.g1[idx * MK], st.M, st.K) = step.Gamma1;
      Eigen::Map<Matrix>(&st.gs[idx * MK], st.M, st.K) = step.Gamma0 + step.Gamma1;
    }
  }
}

MomentEngine::~MomentEngine() = default;

const Matrix& MomentEngine::Phi() const { return stream_->Phi; }

MomentSet MomentEngine::estimate(int k, const std::vector<Matrix>& S_next) const {
  const Stream& st = *stream_;
  const int p = st.p, M = st.M, K = st.K;
  if (k < 0 || k >= st.plant.N) {
    throw std::invalid_argument("estimate: step " + std::to_string(k) +
                                " outside horizon [0, " + std::to_string(st.plant.N) + ")");
  }
  const AugmentedLayout lay{M, K, p, k};
  if (static_cast<int>(S_next.size()) != p) {
    throw std::invalid_argument("estimate: need one value matrix per controller");
  }
  for (int i = 0; i < p; ++i) {
    if (S_next[i].rows() != lay.next_dim() || S_next[i].cols() != lay.next_dim()) {
      throw std::invalid_argument("estimate: value matrix " + std::to_string(i) +
                                  " must be " + std::to_string(lay.next_dim()) +
                                  " square at step " + std::to_string(k));
    }
  }

  MomentSet ms;
  ms.k = k;
  ms.n_samples = st.n_samples;
  ms.seed = st.seed;
  ms.mode = st.mode;
  ms.layout = lay;
  ms.Phi = st.Phi;
  ms.sigma.assign(p, 1.0);
  ms.pi.assign(p, std::vector<double>(p, 1.0));
  if (st.mode == InfoMode::kImperfect) {
    ms.sigma = st.network.p_sc;
    ms.pi = st.network.p_link;
  }

  const int nA = p * (k + 1);
  const int MK = M * K;
  MeanGrid mu_acc(nA, MK);
  MeanGrid mug_acc(p * nA, MK);
  MeanGrid gate_acc(p * p, 1);
  MeanGrid w_acc(p * nA * nA, K * K);

  std::vector<Matrix> Sxx(p);
  for (int i = 0; i < p; ++i) Sxx[i] = S_next[i].topLeftCorner(M, M);

  const int maxf = 2 * p;
  std::vector<int> f_cell(maxf, 0);
  std::vector<const double*> f_val(maxf, nullptr);
  std::vector<Matrix> SV(maxf, Matrix(M, K));
  Matrix tmp(K, K);
  std::vector<std::uint8_t> gate(p, 1);
  const double one = 1.0;

  for (long s1 = 1; s1 <= st.n_samples; ++s1) {
    const long s = s1 - 1;
    int nf = 0;
    for (int l = 0; l < p; ++l) {
      const std::size_t idx = std::size_t(s) * p + l;
      if (st.theta0[idx]) {
        f_cell[nf] = atom_of(l, 0, k);
        f_val[nf] = st.blk(st.g0, s, l);
        ++nf;
      }
      const int js = st.jstar[idx];
      if (js >= 1 && js <= k) {
        f_cell[nf] = atom_of(l, js, k);
        f_val[nf] = st.theta0[idx] ? st.blk(st.g1, s, l) : st.blk(st.gs, s, l);
        ++nf;
      }
      gate[l] = (st.mode == InfoMode::kImperfect) ? st.sc0[idx] : std::uint8_t{1};
    }
    for (int a = 0; a < nf; ++a) mu_acc.observe(f_cell[a], s1, f_val[a]);
    for (int g = 0; g < p; ++g) {
      if (!gate[g]) continue;
      for (int a = 0; a < nf; ++a) mug_acc.observe(g * nA + f_cell[a], s1, f_val[a]);
      for (int h = 0; h < p; ++h) {
        if (gate[h]) gate_acc.observe(g * p + h, s1, &one);
      }
    }
    for (int i = 0; i < p; ++i) {
      for (int b = 0; b < nf; ++b) {
        SV[b].noalias() = Sxx[i] * Eigen::Map<const Matrix>(f_val[b], M, K);
      }
      for (int a = 0; a < nf; ++a) {
        const Eigen::Map<const Matrix> Va(f_val[a], M, K);
        for (int b = 0; b < nf; ++b) {
          tmp.noalias() = Va.transpose() * SV[b];
          w_acc.observe((i * nA + f_cell[a]) * nA + f_cell[b], s1, tmp.data());
        }
      }
    }
  }
  mu_acc.finalize(st.n_samples);
  mug_acc.finalize(st.n_samples);
  gate_acc.finalize(st.n_samples);
  w_acc.finalize(st.n_samples);

  ms.mu.assign(p, std::vector<Matrix>(k + 1));
  ms.mu_gated.assign(p, std::vector<std::vector<Matrix>>(p, std::vector<Matrix>(k + 1)));
  for (int l = 0; l < p; ++l) {
    for (int j = 0; j <= k; ++j) {
      const int a = atom_of(l, j, k);
      ms.mu[l][j] = Eigen::Map<const Matrix>(mu_acc.cell(a), M, K);
      for (int g = 0; g < p; ++g) {
        ms.mu_gated[g][l][j] = Eigen::Map<const Matrix>(mug_acc.cell(g * nA + a), M, K);
      }
    }
  }
  ms.gate2.assign(p, std::vector<double>(p, 0.0));
  for (int g = 0; g < p; ++g) {
    for (int h = 0; h < p; ++h) ms.gate2[g][h] = *gate_acc.cell(g * p + h);
  }
  ms.W.assign(p, Matrix(Matrix::Zero(nA * K, nA * K)));
  for (int i = 0; i < p; ++i) {
    for (int a = 0; a < nA; ++a) {
      for (int b = 0; b < nA; ++b) {
        ms.W[i].block(a * K, b * K, K, K) =
            Eigen::Map<const Matrix>(w_acc.cell((i * nA + a) * nA + b), K, K);
      }
    }
  }

  // Assemble the blocks of the coefficient equations. For controller i,
  // with S = S_next[i] over z_{k+1} = [x; u_1 .. u_p; shifted history]:
  //   G_i   = R_i + E[D_i^T S D_i],     D_i z-free column of u_i
  //   Y_i^l = E[D_i^T S (columns of u_l's strategy)]
  //   rhs_i = E[D_i^T S C_i^(0)],       C_i^(0) = closed loop with every
  //                                     feedback coefficient zeroed
  const int dim = lay.dim();
  ms.G.resize(p);
  ms.Y.assign(p, std::vector<Matrix>(p));
  ms.rhs.resize(p);
  for (int i = 0; i < p; ++i) {
    const Matrix& S = S_next[i];
    const auto Sxu = [&](int b) { return S.block(0, M + b * K, M, K); };
    const auto Sux = [&](int b) { return S.block(M + b * K, 0, K, M); };
    const auto Suu = [&](int b, int c) { return S.block(M + b * K, M + c * K, K, K); };
    const Matrix mu_i0_t = ms.mu[i][0].transpose();

    Matrix Gi = st.plant.R[i] + ms.W_block(i, ms.atom(i, 0), ms.atom(i, 0)) +
                Sux(i) * ms.mu[i][0] + mu_i0_t * Sxu(i) + Suu(i, i);
    symmetrize(Gi);
    const double gmin = min_symmetric_eigenvalue(Gi);
    if (!(gmin > 0.0)) {
      throw SolverError("moment assembly: input-weight block not positive definite at step " +
                        std::to_string(k) + ", controller " + std::to_string(i) +
                        " (min eigenvalue " + std::to_string(gmin) + ")");
    }
    ms.G[i] = std::move(Gi);

    for (int l = 0; l < p; ++l) {
      ms.Y[i][l] = ms.W_block(i, ms.atom(i, 0), ms.atom(l, 0)) + Sux(i) * ms.mu[l][0] +
                   mu_i0_t * Sxu(l) + Suu(i, l);
    }

    Matrix r = Matrix::Zero(K, dim);
    r.leftCols(M) = mu_i0_t * (Sxx[i] * ms.Phi) + Sux(i) * ms.Phi;
    for (int m = 0; m < p; ++m) {
      for (int n = 1; n <= k; ++n) {
        const int off = lay.history_offset(m, n);
        const int sb = n * p + m;  // z_{k+1} block of history entry (m, n)
        r.block(0, off, K, K) = ms.W_block(i, ms.atom(i, 0), ms.atom(m, n)) +
                                Sux(i) * ms.mu[m][n] + mu_i0_t * Sxu(sb) + Suu(i, sb);
      }
    }
    ms.rhs[i] = std::move(r);
  }
  return ms;
}

MomentSet estimate_moments(const PlantSpec& plant, const NetworkSpec& network, int k,
                           const std::vector<Matrix>& S_next, int n_samples,
                           std::uint64_t seed) {
  const MomentEngine engine(plant, network, network.info_mode, n_samples, seed);
  return engine.estimate(k, S_next);
}

BetaSample sample_beta_joint(const PlantSpec& plant, const NetworkSpec& network, int k,
                             std::uint64_t seed, std::uint64_t sample_index) {
  plant.validate();
  network.validate(plant.p());
  if (k < 0) throw std::invalid_argument("sample_beta_joint: k must be non-negative");
  const int p = plant.p();
  BetaSample bs;
  bs.k = k;
  bs.tau.resize(p);
  bs.theta.assign(p, std::vector<std::uint8_t>(k + 1, 0));
  bs.theta_sc_now.resize(p);
  bs.beta.resize(p);
  for (int i = 0; i < p; ++i) {
    const double u = rng::keyed_uniform(seed, rng::kMomentTau, i, sample_index, 0);
    bs.tau[i] = network.delay_alpha[i] * plant.T * u;
    for (int d = 0; d <= k; ++d) {
      const bool sc =
          rng::keyed_bernoulli(network.p_sc[i], seed, rng::kMomentSc, i, sample_index, d);
      const bool ca =
          rng::keyed_bernoulli(network.p_ca[i], seed, rng::kMomentCa, i, sample_index, d);
      if (d == 0) bs.theta_sc_now[i] = sc ? 1 : 0;
      bs.theta[i][k - d] = (sc && ca) ? 1 : 0;
    }
    bs.beta[i] = build_beta(discretize(plant, i, bs.tau[i]), bs.theta[i], k);
  }
  return bs;
}

std::vector<Matrix> expected_csc(const MomentSet& ms, const std::vector<Matrix>& A,
                                 const std::vector<std::vector<std::vector<Matrix>>>& alpha,
                                 const std::vector<Matrix>& S_next) {
  const AugmentedLayout& lay = ms.layout;
  const int p = lay.p, M = lay.M, K = lay.K, k = ms.k;
  const int dim = lay.dim();
  const int dimn = lay.next_dim();
  if (static_cast<int>(A.size()) != p || static_cast<int>(alpha.size()) != p ||
      static_cast<int>(S_next.size()) != p) {
    throw std::invalid_argument("expected_csc: need p entries in A, alpha, S_next");
  }
  for (int l = 0; l < p; ++l) {
    if (A[l].rows() != K || A[l].cols() != M) {
      throw std::invalid_argument("expected_csc: state block of controller " +
                                  std::to_string(l) + " must be K x M");
    }
    if (static_cast<int>(alpha[l].size()) != p) {
      throw std::invalid_argument("expected_csc: alpha must be indexed [l][m][n-1]");
    }
    for (int m = 0; m < p; ++m) {
      if (static_cast<int>(alpha[l][m].size()) != k) {
        throw std::invalid_argument("expected_csc: controller " + std::to_string(l) +
                                    " needs " + std::to_string(k) + " lag blocks");
      }
      for (int n = 1; n <= k; ++n) {
        if (alpha[l][m][n - 1].rows() != K || alpha[l][m][n - 1].cols() != K) {
          throw std::invalid_argument("expected_csc: lag blocks must be K x K");
        }
      }
    }
    if (S_next[l].rows() != dimn || S_next[l].cols() != dimn) {
      throw std::invalid_argument("expected_csc: value matrices must be " +
                                  std::to_string(dimn) + " square");
    }
  }

  // Feedback rows as the closed loop sees them: history entries enter
  // scaled by their availability probability (the switch mean); the
  // switch variance is restored by the diagonal corrections below.
  std::vector<Matrix> Lam(p), Halpha(p);
  for (int l = 0; l < p; ++l) {
    Matrix H = Matrix::Zero(K, dim);
    for (int m = 0; m < p; ++m) {
      for (int n = 1; n <= k; ++n) {
        H.block(0, lay.history_offset(m, n), K, K) = ms.pi[l][m] * alpha[l][m][n - 1];
      }
    }
    Halpha[l] = H;
    H.leftCols(M) = A[l];
    Lam[l] = std::move(H);
  }

  std::vector<Matrix> out(p);
  for (int i = 0; i < p; ++i) {
    const Matrix& S = S_next[i];
    const auto Sxu = [&](int b) { return S.block(0, M + b * K, M, K); };
    const auto Sux = [&](int b) { return S.block(M + b * K, 0, K, M); };
    const auto Suu = [&](int b, int c) { return S.block(M + b * K, M + c * K, K, K); };
    const Matrix Sxx = S.topLeftCorner(M, M);

    // Mean of the random part of the x-row: other controllers' lag-0
    // weights hit their feedback rows, raw history weights select their
    // own columns.
    Matrix EB = Matrix::Zero(M, dim);
    for (int l = 0; l < p; ++l) {
      if (l == i) continue;
      EB.noalias() += ms.mu[l][0] * Lam[l];
    }
    for (int m = 0; m < p; ++m) {
      for (int n = 1; n <= k; ++n) {
        EB.middleCols(lay.history_offset(m, n), K) += ms.mu[m][n];
      }
    }
    Matrix Fbar = EB;
    Fbar.leftCols(M) += ms.Phi;

    Matrix E = Matrix::Zero(dim, dim);

    // x-row quadratic, E[F^T Sxx F] with F = [Phi | 0] + B.
    {
      E.topLeftCorner(M, M) += ms.Phi.transpose() * (Sxx * ms.Phi);
      const Matrix SxxEB = Sxx * EB;
      E.topRows(M) += ms.Phi.transpose() * SxxEB;
      E.leftCols(M) += SxxEB.transpose() * ms.Phi;
      for (int l = 0; l < p; ++l) {
        if (l == i) continue;
        for (int lp = 0; lp < p; ++lp) {
          if (lp == i) continue;
          E.noalias() +=
              (Lam[l].transpose() * ms.W_block(i, ms.atom(l, 0), ms.atom(lp, 0))) * Lam[lp];
        }
        for (int m = 0; m < p; ++m) {
          for (int n = 1; n <= k; ++n) {
            const int off = lay.history_offset(m, n);
            E.middleCols(off, K).noalias() +=
                Lam[l].transpose() * ms.W_block(i, ms.atom(l, 0), ms.atom(m, n));
            E.middleRows(off, K).noalias() +=
                ms.W_block(i, ms.atom(m, n), ms.atom(l, 0)) * Lam[l];
          }
        }
      }
      for (int m = 0; m < p; ++m) {
        for (int n = 1; n <= k; ++n) {
          for (int mp = 0; mp < p; ++mp) {
            for (int np = 1; np <= k; ++np) {
              E.block(lay.history_offset(m, n), lay.history_offset(mp, np), K, K) +=
                  ms.W_block(i, ms.atom(m, n), ms.atom(mp, np));
            }
          }
        }
      }
    }

    // x-row against the strategy rows. The state part of row l carries
    // its own availability switch, so the cross uses the gated means.
    for (int l = 0; l < p; ++l) {
      if (l == i) continue;
      const double gl = ms.gate2[l][l];
      Matrix EBg = Matrix::Zero(M, dim);
      for (int lp = 0; lp < p; ++lp) {
        if (lp == i) continue;
        EBg.noalias() += ms.mu_gated[l][lp][0] * Lam[lp];
      }
      for (int m = 0; m < p; ++m) {
        for (int n = 1; n <= k; ++n) {
          EBg.middleCols(lay.history_offset(m, n), K) += ms.mu_gated[l][m][n];
        }
      }
      Matrix Fg = EBg;
      Fg.leftCols(M) += gl * ms.Phi;

      const Matrix P1 = Fg.transpose() * Sxu(l);  // dim x K
      E.leftCols(M).noalias() += P1 * A[l];
      E.topRows(M).noalias() += A[l].transpose() * P1.transpose();
      const Matrix P2 = Fbar.transpose() * Sxu(l);  // dim x K
      E.noalias() += P2 * Halpha[l];
      E.noalias() += Halpha[l].transpose() * P2.transpose();
    }

    // Strategy rows against each other.
    for (int l = 0; l < p; ++l) {
      if (l == i) continue;
      for (int lp = 0; lp < p; ++lp) {
        if (lp == i) continue;
        const Matrix Su = Suu(l, lp);
        E.topLeftCorner(M, M).noalias() +=
            ms.gate2[l][lp] * (A[l].transpose() * (Su * A[lp]));
        E.topRows(M).noalias() += ms.gate2[l][l] * (A[l].transpose() * (Su * Halpha[lp]));
        E.leftCols(M).noalias() +=
            ms.gate2[lp][lp] * (Halpha[l].transpose() * (Su * A[lp]));
        E.noalias() += Halpha[l].transpose() * (Su * Halpha[lp]);
      }
    }

    // Crosses with the deterministic history shift, then its quadratic.
    if (k > 0) {
      const int nh = dim - M;
      const Matrix Sxs = S.block(0, M + p * K, M, nh);
      E.middleCols(M, nh).noalias() += Fbar.transpose() * Sxs;
      E.middleRows(M, nh).noalias() += Sxs.transpose() * Fbar;
      for (int l = 0; l < p; ++l) {
        if (l == i) continue;
        Matrix Hbar = Halpha[l];
        Hbar.leftCols(M) += ms.gate2[l][l] * A[l];
        const Matrix Sus = S.block(M + l * K, M + p * K, K, nh);
        E.middleCols(M, nh).noalias() += Hbar.transpose() * Sus;
        E.middleRows(M, nh).noalias() += Sus.transpose() * Hbar;
      }
      E.block(M, M, nh, nh) += S.block(M + p * K, M + p * K, nh, nh);
    }

    // Variance of the history availability switches. Each switched entry
    // multiplies T = (x-row weight + own strategy row) alpha; its mean is
    // already inside Lam/Halpha, the Bernoulli variance lands on the
    // diagonal blocks.
    for (int l = 0; l < p; ++l) {
      if (l == i) continue;
      Matrix Kmat = ms.W_block(i, ms.atom(l, 0), ms.atom(l, 0)) +
                    ms.mu[l][0].transpose() * Sxu(l) + Sux(l) * ms.mu[l][0] + Suu(l, l);
      for (int m = 0; m < p; ++m) {
        const double c = ms.pi[l][m] * (1.0 - ms.pi[l][m]);
        if (c <= 0.0) continue;
        for (int n = 1; n <= k; ++n) {
          const int off = lay.history_offset(m, n);
          const Matrix& al = alpha[l][m][n - 1];
          E.block(off, off, K, K).noalias() += c * (al.transpose() * (Kmat * al));
        }
      }
    }

    symmetrize(E);
    out[i] = std::move(E);
  }
  return out;
}

}  // namespace netlqg
