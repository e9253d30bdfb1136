#include "doctest.h"

#include <cmath>

#include "netlqg/matrix_ops.hpp"
#include "netlqg/rng.hpp"
#include "oracles.hpp"

using netlqg::Matrix;

namespace {

Matrix random_matrix(int r, int c, std::uint64_t seed, double scale = 1.0) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < c; ++j) {
      const double u = netlqg::rng::keyed_uniform(seed, netlqg::rng::kTestStream, i, j, 0);
      m(i, j) = scale * (2.0 * u - 1.0);
    }
  }
  return m;
}

}  // namespace

TEST_CASE("matrix exponential matches the Taylor reference") {
  for (std::uint64_t s = 1; s <= 8; ++s) {
    const int n = 2 + static_cast<int>(s % 3);
    const Matrix A = random_matrix(n, n, s, 2.0);
    const Matrix got = netlqg::matrix_exponential(A);
    const Matrix want = oracle::taylor_expm(A);
    CHECK((got - want).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, want.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("matrix exponential of zero and of a diagonal") {
  const Matrix Z = Matrix::Zero(3, 3);
  CHECK((netlqg::matrix_exponential(Z) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() ==
        0.0);

  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 1.5;
  D(1, 1) = -0.75;
  const Matrix E = netlqg::matrix_exponential(D);
  CHECK(E(0, 0) == doctest::Approx(std::exp(1.5)).epsilon(1e-14));
  CHECK(E(1, 1) == doctest::Approx(std::exp(-0.75)).epsilon(1e-14));
  CHECK(std::abs(E(0, 1)) + std::abs(E(1, 0)) == 0.0);
}

TEST_CASE("matrix exponential rejects bad input") {
  CHECK_THROWS_AS(netlqg::matrix_exponential(Matrix::Zero(2, 3)), std::invalid_argument);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(netlqg::matrix_exponential(bad), std::invalid_argument);
}

TEST_CASE("exp_integral matches quadrature of the exponential") {
  for (std::uint64_t s = 11; s <= 16; ++s) {
    const int n = 2 + static_cast<int>(s % 2);
    const Matrix A = random_matrix(n, n, s, 3.0);
    const Matrix B = random_matrix(n, 1, s + 100);
    const double b = 0.4, a = 0.15;
    const Matrix got = netlqg::exp_integral(A, a, b, B);
    const Matrix want = oracle::integral_expm_times(A, a, b, B);
    CHECK((got - want).cwiseAbs().maxCoeff() <=
          1e-11 * std::max(1.0, want.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("exp_integral handles singular A (integrator chain)") {
  // A nilpotent: e^{As} = I + As, so the integral has a closed form.
  Matrix A = Matrix::Zero(2, 2);
  A(0, 1) = 1.0;
  Matrix B(2, 1);
  B << 0.0, 1.0;
  const double b = 0.3;
  const Matrix got = netlqg::exp_integral(A, 0.0, b, B);
  Matrix want(2, 1);
  want << 0.5 * b * b, b;  // integral of [s; 1] ds
  CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("exp_integral over an empty interval is zero") {
  const Matrix A = random_matrix(3, 3, 21);
  const Matrix B = random_matrix(3, 2, 22);
  const Matrix got = netlqg::exp_integral(A, 0.2, 0.2, B);
  CHECK(got.cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("symmetry helpers") {
  Matrix S(2, 2);
  S << 1.0, 2.0, 2.0 + 1e-6, 3.0;
  CHECK(netlqg::is_symmetric(S, 1e-5));
  CHECK_FALSE(netlqg::is_symmetric(S, 1e-8));

  netlqg::symmetrize(S);
  CHECK(S(0, 1) == S(1, 0));

  Matrix P(2, 2);
  P << 2.0, 0.0, 0.0, 0.5;
  CHECK(netlqg::min_symmetric_eigenvalue(P) == doctest::Approx(0.5).epsilon(1e-12));
  P(1, 1) = -1.0;
  CHECK(netlqg::min_symmetric_eigenvalue(P) == doctest::Approx(-1.0).epsilon(1e-12));
}
