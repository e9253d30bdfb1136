#include "netlqg/matrix_ops.hpp"

#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace netlqg {

Matrix matrix_exponential(const Matrix& X) {
  if (X.rows() != X.cols()) {
    throw std::invalid_argument("matrix_exponential: input must be square, got " +
                                std::to_string(X.rows()) + "x" +
                                std::to_string(X.cols()));
  }
  if (!X.allFinite()) {
    throw std::invalid_argument("matrix_exponential: input has non-finite entries");
  }
  return X.exp();
}

Matrix exp_integral(const Matrix& A, double a, double b, const Matrix& B) {
  if (A.rows() != A.cols()) {
    throw std::invalid_argument("exp_integral: A must be square");
  }
  if (B.rows() != A.rows()) {
    throw std::invalid_argument("exp_integral: B row count must match A");
  }
  if (!(a >= 0.0) || !(b >= a)) {
    throw std::invalid_argument("exp_integral: need 0 <= a <= b, got a=" +
                                std::to_string(a) + " b=" + std::to_string(b));
  }
  const Eigen::Index n = A.rows();
  Matrix W = Matrix::Zero(2 * n, 2 * n);
  W.topLeftCorner(n, n) = A;
  W.topRightCorner(n, n) = Matrix::Identity(n, n);
  // exp(W t) = [[e^{At}, J(t)], [0, I]] with J(t) = integral_0^t e^{As} ds.
  const Matrix Jb = matrix_exponential(W * b).topRightCorner(n, n);
  if (a == 0.0) return Jb * B;
  const Matrix Ja = matrix_exponential(W * a).topRightCorner(n, n);
  return (Jb - Ja) * B;
}

bool is_symmetric(const Matrix& S, double tol) {
  if (S.rows() != S.cols()) return false;
  return (S - S.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double min_symmetric_eigenvalue(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void symmetrize(Matrix& S) { S = 0.5 * (S + S.transpose()).eval(); }

}  // namespace netlqg
