#include "ssacpd/ssa.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "ssacpd/seeding.hpp"

namespace ssacpd {

namespace {

constexpr double kEigFloor = 1e-12;
constexpr double kArmijoC = 1e-4;

Index upper_index(Index dim, Index i, Index j) {
    // row-major strict upper triangle
    return i * dim - i * (i + 1) / 2 + (j - i - 1);
}

} // namespace

RotationParam RotationParam::zero(Index dim) {
    RotationParam p;
    p.dim = dim;
    p.upper.assign(static_cast<std::size_t>(dim * (dim - 1) / 2), 0.0);
    return p;
}

RotationParam RotationParam::from_matrix(const Matrix& antisym) {
    if (antisym.rows() != antisym.cols()) {
        throw ValidationError("RotationParam: matrix must be square");
    }
    double scale = std::max(1.0, antisym.cwiseAbs().maxCoeff());
    if ((antisym + antisym.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ValidationError("RotationParam: matrix is not antisymmetric");
    }
    RotationParam p = zero(antisym.rows());
    for (Index i = 0; i < p.dim; ++i)
        for (Index j = i + 1; j < p.dim; ++j) p.upper[upper_index(p.dim, i, j)] = antisym(i, j);
    return p;
}

Matrix RotationParam::to_matrix() const {
    Matrix m = Matrix::Zero(dim, dim);
    for (Index i = 0; i < dim; ++i) {
        for (Index j = i + 1; j < dim; ++j) {
            double v = upper[upper_index(dim, i, j)];
            m(i, j) = v;
            m(j, i) = -v;
        }
    }
    return m;
}

double& RotationParam::at(Index i, Index j) { return upper[upper_index(dim, i, j)]; }
double RotationParam::at(Index i, Index j) const { return upper[upper_index(dim, i, j)]; }

Matrix rotation_exp(const Matrix& antisym) { return antisym.exp(); }

Matrix rotation_exp(const RotationParam& param) { return param.to_matrix().exp(); }

double ssa_objective(const EpochStats& whitened, const Eigen::Ref<const Matrix>& projection,
                     bool* clamped) {
    const Index d = projection.rows();
    if (projection.cols() != whitened.dim()) {
        throw ValidationError("ssa_objective: projection/stats dimension mismatch");
    }
    double total = 0.0;
    Matrix proj_cov(d, d);
    for (Index i = 0; i < whitened.n_epochs(); ++i) {
        proj_cov.noalias() = projection * whitened.covariances[i] * projection.transpose();
        proj_cov = symmetrized(proj_cov);
        total -= logdet_clamped(proj_cov, kEigFloor, clamped);
        total += (projection * whitened.means[i]).squaredNorm();
    }
    return total;
}

namespace {

// Euclidean differential: d objective = tr(dM * G) with B = top-d rows of
// exp(M) R evaluated at M = 0. The antisymmetric gradient is G^T - G.
Matrix objective_euclidean_grad(const EpochStats& stats, const Matrix& rotation, Index d) {
    const Index dim = stats.dim();
    const Matrix b = rotation.topRows(d);
    Matrix k = Matrix::Zero(dim, d);
    Matrix proj_cov(d, d);
    for (Index i = 0; i < stats.n_epochs(); ++i) {
        const Matrix& sigma = stats.covariances[i];
        proj_cov.noalias() = b * sigma * b.transpose();
        proj_cov = symmetrized(proj_cov);
        Eigen::LLT<Matrix> llt(proj_cov);
        Matrix inv;
        if (llt.info() == Eigen::Success) {
            inv = llt.solve(Matrix::Identity(d, d));
        } else {
            Eigen::SelfAdjointEigenSolver<Matrix> eig(proj_cov);
            Vector ev = eig.eigenvalues().cwiseMax(kEigFloor);
            inv = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                  eig.eigenvectors().transpose();
        }
        k.noalias() += stats.means[i] * (b * stats.means[i]).transpose();
        k.noalias() -= sigma * b.transpose() * inv;
    }
    Matrix g = Matrix::Zero(dim, dim);
    g.leftCols(d) = 2.0 * (rotation * k);
    return g;
}

} // namespace

Matrix ssa_gradient_at(const EpochStats& whitened, const Matrix& rotation, int d,
                       SsaMode mode) {
    Matrix g = objective_euclidean_grad(whitened, rotation, d);
    Matrix grad = g.transpose() - g;
    if (mode == SsaMode::maximize) grad = -grad;
    return grad;
}

Matrix ssa_gradient(const EpochStats& whitened, const RotationParam& anchor, int d,
                    SsaMode mode) {
    return ssa_gradient_at(whitened, rotation_exp(anchor), d, mode);
}

namespace {

struct RestartResult {
    Matrix rotation;
    double value = std::numeric_limits<double>::infinity(); // sign-adjusted objective
    int iterations = 0;
    bool converged = false;
    bool clamped = false;
};

RestartResult optimize_from(const EpochStats& stats, Matrix rotation, Index d,
                            double sign, const SsaConfig& cfg) {
    RestartResult res;
    double value = sign * ssa_objective(stats, rotation.topRows(d), &res.clamped);
    double step = cfg.step_init;
    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        Matrix grad = sign * ssa_gradient_at(stats, rotation, static_cast<int>(d),
                                             SsaMode::minimize);
        double grad_inf = grad.cwiseAbs().maxCoeff();
        if (grad_inf < cfg.grad_tol) {
            res.converged = true;
            break;
        }
        double slope = -grad.squaredNorm();
        double eta = std::min(2.0 * step, cfg.step_init * 4.0);
        bool accepted = false;
        for (int half = 0; half < 48; ++half) {
            Matrix trial = rotation_exp(Matrix(-eta * grad)) * rotation;
            bool clamped_trial = false;
            double trial_value = sign * ssa_objective(stats, trial.topRows(d), &clamped_trial);
            if (trial_value <= value + kArmijoC * eta * slope) {
                rotation = std::move(trial);
                value = trial_value;
                step = eta;
                res.clamped = res.clamped || clamped_trial;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) break; // step collapsed below resolution
        if ((iter & 31) == 31) rotation = orthonormal_rows(rotation); // drift control
    }
    res.rotation = orthonormal_rows(rotation);
    bool clamped_final = false;
    res.value = sign * ssa_objective(stats, res.rotation.topRows(d), &clamped_final);
    res.clamped = res.clamped || clamped_final;
    res.iterations = iter;
    return res;
}

SsaFit fit_projection(const EpochStats& whitened, const SsaConfig& cfg, SsaMode mode) {
    const Index dim = whitened.dim();
    if (cfg.dim < 1 || cfg.dim >= dim) {
        throw ValidationError("SsaConfig: dim must satisfy 1 <= dim < D");
    }
    if (cfg.n_restarts < 1 || cfg.max_iters < 1 || cfg.grad_tol <= 0 || cfg.step_init <= 0) {
        throw ValidationError("SsaConfig: invalid optimizer settings");
    }
    const double sign = (mode == SsaMode::minimize) ? 1.0 : -1.0;

    SsaFit best;
    double best_value = std::numeric_limits<double>::infinity();
    for (int r = 0; r < cfg.n_restarts; ++r) {
        Matrix init;
        if (r == 0) {
            init = Matrix::Identity(dim, dim);
        } else {
            auto rng = make_rng(cfg.seed, "ssa_restart", static_cast<std::uint64_t>(r));
            init = random_rotation(dim, rng);
        }
        RestartResult res = optimize_from(whitened, std::move(init), cfg.dim, sign, cfg);
        if (std::isfinite(res.value) && res.value < best_value) {
            best_value = res.value;
            best.rotation = res.rotation;
            best.projection = res.rotation.topRows(cfg.dim);
            best.objective = sign * res.value;
            best.best_restart = r;
            best.iterations = res.iterations;
            best.converged = res.converged;
            best.clamped = res.clamped;
        }
    }
    if (best.best_restart < 0) {
        throw NumericalError("SSA fit: all restarts diverged");
    }
    return best;
}

} // namespace

SsaFit fit_s_projection(const EpochStats& whitened, const SsaConfig& config) {
    return fit_projection(whitened, config, SsaMode::minimize);
}

SsaFit fit_n_projection(const EpochStats& whitened, const SsaConfig& config) {
    return fit_projection(whitened, config, SsaMode::maximize);
}

DemixingModel fit_ssa(const TimeSeries& series, const Epoching& epochs, int d_s,
                      const SsaConfig& config) {
    const Index dim = series.channels();
    if (d_s < 1 || d_s >= dim) {
        throw ValidationError("fit_ssa: d_s must satisfy 1 <= d_s < D");
    }
    EpochStats stats = epoch_stats(series, epochs);
    DemixingModel model;
    model.whitening = fit_whitening(stats);
    EpochStats white = model.whitening.apply(stats);

    SsaConfig cfg_s = config;
    cfg_s.dim = d_s;
    cfg_s.seed = derive_seed(config.seed, "fit_s");
    SsaFit fs = fit_s_projection(white, cfg_s);
    model.b_s = fs.projection;
    model.objective_s = fs.objective;

    SsaConfig cfg_n = config;
    cfg_n.dim = static_cast<int>(dim) - d_s;
    cfg_n.seed = derive_seed(config.seed, "fit_n");
    SsaFit fn = fit_n_projection(white, cfg_n);
    model.b_n = fn.projection;
    model.objective_n = fn.objective;
    return model;
}

TimeSeries extract_sources(const TimeSeries& series, const DemixingModel& model,
                           SourceKind kind) {
    if (series.channels() != model.dim()) {
        throw ValidationError("extract_sources: series/model dimension mismatch");
    }
    const Matrix& b = (kind == SourceKind::stationary) ? model.b_s : model.b_n;
    Matrix white = model.whitening.matrix * (series.data.colwise() - model.whitening.shift);
    return TimeSeries(b * white);
}

} // namespace ssacpd
