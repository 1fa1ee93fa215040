#include "ssacpd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ssacpd {

double spd_logdet(const Matrix& m, const char* context) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(std::string(context) + ": not positive definite");
    }
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Matrix spd_inverse(const Matrix& m, const char* context) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericalError(std::string(context) + ": not positive definite");
    }
    return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

double logdet_clamped(const Matrix& m, double floor, bool* clamped) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() == Eigen::Success) {
        double ld = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        if (std::isfinite(ld)) return ld;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    double ld = 0.0;
    for (Index i = 0; i < m.rows(); ++i) {
        double ev = eig.eigenvalues()(i);
        if (ev < floor) {
            ev = floor;
            if (clamped) *clamped = true;
        }
        ld += std::log(ev);
    }
    return ld;
}

Matrix inverse_sqrt_spd(const Matrix& m, double rel_tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    const Vector& ev = eig.eigenvalues();
    double largest = ev(ev.size() - 1);
    if (largest <= 0.0 || ev(0) < rel_tol * largest) {
        throw NumericalError("rank-deficient matrix: smallest eigenvalue " +
                             std::to_string(ev(0)) + " below tolerance");
    }
    return eig.eigenvectors() * ev.array().rsqrt().matrix().asDiagonal() *
           eig.eigenvectors().transpose();
}

Matrix orthonormal_rows(const Matrix& a) {
    // Factor a^T = QR; rows of the result are the columns of Q with the sign
    // convention diag(R) > 0, which makes the output deterministic.
    Eigen::HouseholderQR<Matrix> qr(a.transpose());
    Matrix q = qr.householderQ() * Matrix::Identity(a.cols(), a.rows());
    Matrix r = qr.matrixQR().topRows(a.rows()).triangularView<Eigen::Upper>();
    for (Index j = 0; j < a.rows(); ++j) {
        if (r(j, j) < 0) q.col(j) = -q.col(j);
        if (r(j, j) == 0.0) {
            throw NumericalError("orthonormal_rows: input rows are rank deficient");
        }
    }
    return q.transpose();
}

Matrix random_rotation(Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(dim, dim);
    for (Index i = 0; i < dim; ++i)
        for (Index j = 0; j < dim; ++j) g(i, j) = gauss(rng);
    Matrix q = orthonormal_rows(g.transpose());
    // orthonormal_rows returns Q^T; for a rotation we want det +1.
    if (q.determinant() < 0) q.row(dim - 1) = -q.row(dim - 1);
    return q;
}

Matrix random_orthonormal_rows(Index dim, Index d, std::mt19937_64& rng) {
    if (d > dim) throw ValidationError("random_orthonormal_rows: d exceeds dim");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(d, dim);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < dim; ++j) g(i, j) = gauss(rng);
    return orthonormal_rows(g);
}

Vector principal_angles(const Matrix& rows_a, const Matrix& rows_b) {
    Matrix m = rows_a * rows_b.transpose();
    Eigen::JacobiSVD<Matrix> svd(m);
    Vector angles(svd.singularValues().size());
    for (Index i = 0; i < angles.size(); ++i) {
        double s = std::clamp(svd.singularValues()(i), -1.0, 1.0);
        angles(angles.size() - 1 - i) = std::acos(s);
    }
    return angles;
}

} // namespace ssacpd
