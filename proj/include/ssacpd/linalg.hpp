#pragma once

#include <Eigen/Dense>
#include <random>

#include "ssacpd/errors.hpp"

namespace ssacpd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// log det of an SPD matrix via Cholesky. Throws NumericalError if the
// factorization fails.
double spd_logdet(const Matrix& m, const char* context = "matrix");

// Cholesky-based inverse of an SPD matrix.
Matrix spd_inverse(const Matrix& m, const char* context = "matrix");

// log det with an eigenvalue floor: eigenvalues below `floor` are clamped and
// `clamped` (when non-null) is set. Total function, never throws on PSD-ish input.
double logdet_clamped(const Matrix& m, double floor, bool* clamped);

// Symmetric inverse square root S^{-1/2}. Throws NumericalError when the
// smallest eigenvalue is below rel_tol times the largest.
Matrix inverse_sqrt_spd(const Matrix& m, double rel_tol = 1e-12);

// Orthonormalize the rows of a full-row-rank matrix (QR with a deterministic
// sign convention: the R factor has positive diagonal).
Matrix orthonormal_rows(const Matrix& a);

// Haar-distributed D x D rotation (QR of a Gaussian matrix, sign-fixed).
Matrix random_rotation(Index dim, std::mt19937_64& rng);

// d x D matrix with orthonormal rows, rows uniform on the Stiefel manifold.
Matrix random_orthonormal_rows(Index dim, Index d, std::mt19937_64& rng);

// Principal angles (radians, ascending) between the row spaces of two
// matrices with orthonormal rows.
Vector principal_angles(const Matrix& rows_a, const Matrix& rows_b);

} // namespace ssacpd
