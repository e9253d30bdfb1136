#pragma once

#include <Eigen/Dense>

namespace netlqg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// e^X for square X. Scaling-and-squaring with a Pade approximant;
// relative error <= 1e-12 for ||X|| <= 10. Throws std::invalid_argument
// on non-square or non-finite input.
Matrix matrix_exponential(const Matrix& X);

// (integral_a^b e^{As} ds) * B for 0 <= a <= b, computed exactly through
// the exponential of the augmented block matrix [[A, I], [0, 0]] evaluated
// at b and a (difference of the off-diagonal blocks times B). No
// quadrature, no singularity handling for non-invertible A.
Matrix exp_integral(const Matrix& A, double a, double b, const Matrix& B);

// Symmetry / definiteness helpers used by validation and the recursion.
bool is_symmetric(const Matrix& S, double tol);
double min_symmetric_eigenvalue(const Matrix& S);
void symmetrize(Matrix& S);

}  // namespace netlqg
