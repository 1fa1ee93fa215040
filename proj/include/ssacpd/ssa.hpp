#pragma once

#include <cstdint>
#include <vector>

#include "ssacpd/timeseries.hpp"

namespace ssacpd {

enum class SsaMode { minimize, maximize };

struct SsaConfig {
    int dim = 1;              // rows of the fitted projection (d_s or d_n)
    int n_restarts = 5;
    int max_iters = 500;
    double grad_tol = 1e-6;
    double step_init = 1.0;
    std::uint64_t seed = 0;
};

// Antisymmetric D x D matrix stored as its strictly upper triangle, the
// tangent-space parameterization of rotations: R = exp(M).
struct RotationParam {
    Index dim = 0;
    std::vector<double> upper; // row-major strict upper triangle, dim*(dim-1)/2

    static RotationParam zero(Index dim);
    static RotationParam from_matrix(const Matrix& antisym);
    Matrix to_matrix() const;

    double& at(Index i, Index j); // i < j
    double at(Index i, Index j) const;
};

// exp(M) for antisymmetric M; orthogonal with determinant +1.
Matrix rotation_exp(const RotationParam& param);
Matrix rotation_exp(const Matrix& antisym);

// Sum over epochs of -log det(B Sigma_i B^T) + ||B mu_i||^2 for an orthonormal
// projection B on whitened stats. Near-singular projected covariances are
// floored at 1e-12 inside the log det so that line searches stay total.
double ssa_objective(const EpochStats& whitened, const Eigen::Ref<const Matrix>& projection,
                     bool* clamped = nullptr);

// Gradient of f(M) = s * objective(top-d rows of exp(M) exp(anchor)) at M = 0,
// where s = +1 for minimize and -1 for maximize; returned as the antisymmetric
// matrix of partials with respect to the strictly upper entries of M.
Matrix ssa_gradient(const EpochStats& whitened, const RotationParam& anchor, int d,
                    SsaMode mode);
Matrix ssa_gradient_at(const EpochStats& whitened, const Matrix& rotation, int d,
                       SsaMode mode);

struct SsaFit {
    Matrix projection;   // d x D, orthonormal rows
    Matrix rotation;     // full D x D rotation whose top rows are `projection`
    double objective = 0;
    int best_restart = -1;
    int iterations = 0;  // iterations of the winning restart
    bool converged = false;
    bool clamped = false; // eigenvalue floor was hit at least once
};

SsaFit fit_s_projection(const EpochStats& whitened, const SsaConfig& config);
SsaFit fit_n_projection(const EpochStats& whitened, const SsaConfig& config);

// Whitening plus both fitted projections in whitened coordinates.
struct DemixingModel {
    WhiteningTransform whitening;
    Matrix b_s; // d_s x D
    Matrix b_n; // d_n x D
    double objective_s = 0;
    double objective_n = 0;

    Index dim() const { return whitening.dim(); }
    Index d_s() const { return b_s.rows(); }
    Index d_n() const { return b_n.rows(); }
};

// Convenience: whiten, fit the s-projection with dim d_s and the n-projection
// with dim D - d_s.
DemixingModel fit_ssa(const TimeSeries& series, const Epoching& epochs, int d_s,
                      const SsaConfig& config);

enum class SourceKind { stationary, nonstationary };

// Estimated sources: b W (x - shift), with b = b_s or b_n.
TimeSeries extract_sources(const TimeSeries& series, const DemixingModel& model,
                           SourceKind kind);

} // namespace ssacpd
