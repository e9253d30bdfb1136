#include "netlqg/types.hpp"

namespace netlqg {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void require_symmetric(const Matrix& S, const std::string& name) {
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  require(is_symmetric(S, 1e-10 * scale), name + " must be symmetric");
}

// PSD up to a relative eigenvalue slack. The running state weight is
// checked PSD rather than PD on purpose: rank-deficient Q_1 (as in the
// generic benchmark, where Q_1 is an exact rank-one outer product) is
// harmless because only the control weights enter the inverted blocks.
void require_psd(const Matrix& S, const std::string& name) {
  require_symmetric(S, name);
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  require(min_symmetric_eigenvalue(S) >= -1e-10 * scale,
          name + " must be positive semidefinite");
}

void require_pd(const Matrix& S, const std::string& name) {
  require_symmetric(S, name);
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  require(min_symmetric_eigenvalue(S) > 1e-12 * scale,
          name + " must be positive definite");
}

void require_prob(double v, const std::string& name) {
  require(v >= 0.0 && v <= 1.0, name + " must lie in [0, 1]");
}

}  // namespace

void PlantSpec::validate() const {
  require(A.rows() > 0 && A.rows() == A.cols(), "A must be square and non-empty");
  require(A.allFinite(), "A has non-finite entries");
  require(!B.empty(), "need at least one controller input matrix");
  const int m = M();
  const int k = K();
  require(k > 0, "controller input dimension must be positive");
  for (size_t i = 0; i < B.size(); ++i) {
    require(B[i].rows() == m && B[i].cols() == k,
            "B[" + std::to_string(i) + "] must be " + std::to_string(m) + "x" +
                std::to_string(k));
    require(B[i].allFinite(), "B[" + std::to_string(i) + "] has non-finite entries");
  }
  require(T > 0.0, "sampling period T must be positive");
  require(N >= 1, "horizon N must be at least 1");
  require(Q_N.rows() == m && Q_N.cols() == m, "Q_N must be MxM");
  require(Q_1.rows() == m && Q_1.cols() == m, "Q_1 must be MxM");
  require_psd(Q_N, "Q_N");
  require_psd(Q_1, "Q_1");
  require(R.size() == B.size(), "need one R per controller");
  for (size_t i = 0; i < R.size(); ++i) {
    require(R[i].rows() == k && R[i].cols() == k,
            "R[" + std::to_string(i) + "] must be KxK");
    require_pd(R[i], "R[" + std::to_string(i) + "]");
  }
  require(x0.size() == m, "x0 must have dimension M");
  require(x0.allFinite(), "x0 has non-finite entries");
}

void NetworkSpec::validate(int plant_p) const {
  require(p == plant_p, "network controller count must match plant");
  require(static_cast<int>(delay_alpha.size()) == p, "delay_alpha needs p entries");
  require(static_cast<int>(p_sc.size()) == p, "p_sc needs p entries");
  require(static_cast<int>(p_ca.size()) == p, "p_ca needs p entries");
  require(static_cast<int>(p_link.size()) == p, "p_link needs p rows");
  for (int i = 0; i < p; ++i) {
    require(delay_alpha[i] >= 0.0 && delay_alpha[i] <= 1.0,
            "delay_alpha[" + std::to_string(i) + "] must lie in [0, 1]");
    require_prob(p_sc[i], "p_sc[" + std::to_string(i) + "]");
    require_prob(p_ca[i], "p_ca[" + std::to_string(i) + "]");
    require(static_cast<int>(p_link[i].size()) == p,
            "p_link[" + std::to_string(i) + "] needs p entries");
    for (int m = 0; m < p; ++m) {
      require_prob(p_link[i][m],
                   "p_link[" + std::to_string(i) + "][" + std::to_string(m) + "]");
    }
    require(p_link[i][i] == 1.0,
            "p_link[i][i] must be 1 (a controller always has its own history)");
  }
}

}  // namespace netlqg
