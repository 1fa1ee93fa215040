#pragma once

#include "ssacpd/linalg.hpp"

namespace ssacpd {

// KL( N(mean, cov) || N(0, I) ) = 1/2 (tr cov + mean^T mean - d - log det cov).
double kl_gauss_to_standard(const Vector& mean, const Matrix& cov);

// KL( N(mean_a, cov_a) || N(mean_b, cov_b) ), both covariances SPD.
double kl_gauss(const Vector& mean_a, const Matrix& cov_a,
                const Vector& mean_b, const Matrix& cov_b);

// 1/2 KL(A||B) + 1/2 KL(B||A).
double kl_gauss_symmetrized(const Vector& mean_a, const Matrix& cov_a,
                            const Vector& mean_b, const Matrix& cov_b);

// Gaussian log-likelihood of `count` samples whose ML moments are
// (sample_mean, sample_cov_ml) under the model N(model_mean, model_cov).
double gauss_loglik_from_stats(const Vector& sample_mean, const Matrix& sample_cov_ml,
                               Index count, const Vector& model_mean,
                               const Matrix& model_cov);

} // namespace ssacpd
