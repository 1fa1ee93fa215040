#include "ssacpd/gaussian.hpp"

#include <cmath>
#include <numbers>

namespace ssacpd {

double kl_gauss_to_standard(const Vector& mean, const Matrix& cov) {
    const double d = static_cast<double>(mean.size());
    double logdet = spd_logdet(cov, "kl_gauss_to_standard");
    return 0.5 * (cov.trace() + mean.squaredNorm() - d - logdet);
}

double kl_gauss(const Vector& mean_a, const Matrix& cov_a,
                const Vector& mean_b, const Matrix& cov_b) {
    const Index d = mean_a.size();
    if (mean_b.size() != d || cov_a.rows() != d || cov_b.rows() != d) {
        throw ValidationError("kl_gauss: dimension mismatch");
    }
    Eigen::LLT<Matrix> llt_b(cov_b);
    if (llt_b.info() != Eigen::Success) {
        throw NumericalError("kl_gauss: second covariance not positive definite");
    }
    double logdet_b = 2.0 * llt_b.matrixL().toDenseMatrix().diagonal().array().log().sum();
    double logdet_a = spd_logdet(cov_a, "kl_gauss: first covariance");
    Vector dm = mean_b - mean_a;
    double trace_term = llt_b.solve(cov_a).trace();
    double maha = dm.dot(llt_b.solve(dm));
    return 0.5 * (trace_term + maha - static_cast<double>(d) + logdet_b - logdet_a);
}

double kl_gauss_symmetrized(const Vector& mean_a, const Matrix& cov_a,
                            const Vector& mean_b, const Matrix& cov_b) {
    return 0.5 * kl_gauss(mean_a, cov_a, mean_b, cov_b) +
           0.5 * kl_gauss(mean_b, cov_b, mean_a, cov_a);
}

double gauss_loglik_from_stats(const Vector& sample_mean, const Matrix& sample_cov_ml,
                               Index count, const Vector& model_mean,
                               const Matrix& model_cov) {
    const double d = static_cast<double>(sample_mean.size());
    const double n = static_cast<double>(count);
    Eigen::LLT<Matrix> llt(model_cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("gauss_loglik_from_stats: model covariance not positive definite");
    }
    double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    Vector dm = sample_mean - model_mean;
    // sum_t (x_t - m)^T C^{-1} (x_t - m) = n [ tr(C^{-1} S_ml) + dm^T C^{-1} dm ]
    double quad = llt.solve(sample_cov_ml).trace() + dm.dot(llt.solve(dm));
    return -0.5 * n * (d * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

} // namespace ssacpd
