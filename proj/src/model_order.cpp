#include "ssacpd/model_order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ssacpd/gaussian.hpp"
#include "ssacpd/seeding.hpp"

namespace ssacpd {

namespace {

// Regularized lower incomplete gamma P(a, x). Series expansion for
// x < a + 1, Lentz continued fraction for the complement otherwise.
double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        double denom = a;
        for (int k = 0; k < 1000; ++k) {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return std::exp(log_prefactor) * sum;
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int k = 1; k < 1000; ++k) {
        double an = -static_cast<double>(k) * (static_cast<double>(k) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(log_prefactor) * h;
}

} // namespace

double chi2_cdf(double x, double dof) {
    if (dof <= 0.0) throw ValidationError("chi2_cdf: dof must be positive");
    if (x < 0.0) throw ValidationError("chi2_cdf: x must be nonnegative");
    if (x == 0.0) return 0.0;
    return std::clamp(gamma_p(0.5 * dof, 0.5 * x), 0.0, 1.0);
}

StationarityTest likelihood_ratio_statistic(const EpochStats& projected, int d) {
    if (projected.dim() != d) {
        throw ValidationError("likelihood_ratio_statistic: stats dim != d");
    }
    EpochStats stats = projected;
    {
        // Normalization precondition: average epoch mean 0, pooled second
        // moment I. Re-whiten within the projected space when violated.
        Vector m = stats.mean_of_means();
        Matrix s = Matrix::Zero(d, d);
        for (Index i = 0; i < stats.n_epochs(); ++i) {
            s += stats.covariances[i] + stats.means[i] * stats.means[i].transpose();
        }
        s /= static_cast<double>(stats.n_epochs());
        if (m.cwiseAbs().maxCoeff() > 1e-6 ||
            (s - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-6) {
            stats = fit_whitening(stats).apply(stats);
        }
    }

    const Index n = stats.n_epochs();
    const Vector zero = Vector::Zero(d);
    const Matrix eye = Matrix::Identity(d, d);
    double loglik_null = 0.0;
    double loglik_alt = 0.0;
    double closed_sum = 0.0;
    Index total = 0;
    for (Index i = 0; i < n; ++i) {
        const Index count = stats.counts[i];
        const double scale = static_cast<double>(count - 1) / static_cast<double>(count);
        Matrix cov_ml = symmetrized(scale * stats.covariances[i]);
        double logdet_ml;
        try {
            logdet_ml = spd_logdet(cov_ml, "likelihood_ratio_statistic");
        } catch (const NumericalError&) {
            throw NumericalError("likelihood_ratio_statistic: singular covariance in epoch " +
                                 std::to_string(i));
        }
        loglik_null += gauss_loglik_from_stats(stats.means[i], cov_ml, count, zero, eye);
        loglik_alt += gauss_loglik_from_stats(stats.means[i], cov_ml, count, stats.means[i], cov_ml);
        closed_sum += static_cast<double>(count) *
                      (-logdet_ml + stats.means[i].squaredNorm() + cov_ml.trace());
        total += count;
    }
    StationarityTest test;
    test.lambda = -2.0 * (loglik_null - loglik_alt);
    // Cross-check against the closed-form simplification (which differs from
    // the direct evaluation only by the constant -d * total).
    double closed_lambda = closed_sum - static_cast<double>(d) * static_cast<double>(total);
    if (std::abs(test.lambda - closed_lambda) >
        1e-6 * std::max({1.0, std::abs(test.lambda), std::abs(closed_lambda)})) {
        throw NumericalError("likelihood_ratio_statistic: direct and closed-form values disagree");
    }
    test.dof = 0.5 * static_cast<double>(n) * d * (d + 3);
    test.p_value = std::clamp(1.0 - chi2_cdf(std::max(0.0, test.lambda), test.dof), 0.0, 1.0);
    return test;
}

OrderSelection select_order(const EpochStats& whitened, const SsaConfig& base, double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0) {
        throw ValidationError("select_order: alpha must be in (0, 1)");
    }
    const Index dim = whitened.dim();
    if (dim < 2) throw ValidationError("select_order: need at least 2 channels");
    OrderSelection sel;
    sel.alpha = alpha;
    sel.chosen_d_s = 0;
    for (int d = 1; d < dim; ++d) {
        StationarityTest test;
        try {
            SsaConfig cfg = base;
            cfg.dim = d;
            cfg.seed = derive_seed(base.seed, "order_candidate", static_cast<std::uint64_t>(d));
            SsaFit fit = fit_s_projection(whitened, cfg);
            test = likelihood_ratio_statistic(transform_stats(whitened, fit.projection), d);
        } catch (const NumericalError&) {
            // A failed candidate counts as rejecting.
            test.lambda = std::numeric_limits<double>::quiet_NaN();
            test.dof = 0.5 * static_cast<double>(whitened.n_epochs()) * d * (d + 3);
            test.p_value = 0.0;
        }
        if (test.p_value >= alpha) sel.chosen_d_s = d;
        sel.per_d.push_back(test);
    }
    return sel;
}

namespace {

// Loss of a fixed projection on a fresh data segment: stats in the training
// whitening frame, projected, re-whitened within the projected space.
double projected_holdout_loss(const TimeSeries& segment, const Epoching& epochs,
                              const WhiteningTransform& train_whitening,
                              const Matrix& projection) {
    EpochStats stats = train_whitening.apply(epoch_stats(segment, epochs));
    EpochStats proj = transform_stats(stats, projection);
    EpochStats renorm = fit_whitening(proj).apply(proj);
    return ssa_objective(renorm, Matrix::Identity(projection.rows(), projection.rows()));
}

TimeSeries permuted_copy(const TimeSeries& series, std::mt19937_64& rng) {
    std::vector<Index> perm(series.samples());
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix shuffled(series.channels(), series.samples());
    for (Index t = 0; t < series.samples(); ++t) shuffled.col(t) = series.data.col(perm[t]);
    return TimeSeries(std::move(shuffled));
}

} // namespace

HoldoutResult holdout_stationarity_check(const TimeSeries& series, int d_s,
                                         const HoldoutConfig& config) {
    const Index half = series.samples() / 2;
    Epoching epochs = make_epochs(half, config.n_epochs);
    TimeSeries first(series.data.leftCols(half));
    TimeSeries second(series.data.middleCols(half, half));

    EpochStats train_stats = epoch_stats(first, epochs);
    WhiteningTransform w = fit_whitening(train_stats);
    SsaConfig cfg = config.ssa;
    cfg.dim = d_s;
    cfg.seed = derive_seed(config.seed, "holdout_fit", static_cast<std::uint64_t>(d_s));
    SsaFit fit = fit_s_projection(w.apply(train_stats), cfg);

    HoldoutResult res;
    res.loss = projected_holdout_loss(second, epochs, w, fit.projection);

    std::vector<double> perm_losses;
    perm_losses.reserve(config.n_permutations);
    for (int j = 0; j < config.n_permutations; ++j) {
        auto rng = make_rng(config.seed, "holdout_perm",
                            static_cast<std::uint64_t>(d_s) * 1000003ull + j);
        TimeSeries permuted = permuted_copy(series, rng);
        TimeSeries perm_second(permuted.data.middleCols(half, half));
        perm_losses.push_back(projected_holdout_loss(perm_second, epochs, w, fit.projection));
    }
    const double n = static_cast<double>(perm_losses.size());
    res.perm_mean = std::accumulate(perm_losses.begin(), perm_losses.end(), 0.0) / std::max(1.0, n);
    if (perm_losses.size() >= 2) {
        double ss = 0.0;
        for (double v : perm_losses) ss += (v - res.perm_mean) * (v - res.perm_mean);
        res.perm_std = std::sqrt(ss / (n - 1.0));
    } else {
        res.perm_std = std::numeric_limits<double>::quiet_NaN();
    }
    return res;
}

BniseReport bnise(const TimeSeries& series, int up_to_d, const HoldoutConfig& config) {
    if (up_to_d < 1 || up_to_d > series.channels()) {
        throw ValidationError("bnise: up_to_d must be in 1..D");
    }
    BniseReport report;
    report.n_permutations = config.n_permutations;
    report.seed = config.seed;
    double cumulative = 0.0;
    bool cumulative_defined = true;
    for (int d = 1; d <= up_to_d; ++d) {
        BniseEntry entry;
        entry.d = d;
        entry.bnise = cumulative_defined ? std::optional<double>(cumulative) : std::nullopt;
        if (d < series.channels()) {
            HoldoutResult h = holdout_stationarity_check(series, d, config);
            entry.loss = h.loss;
            entry.perm_mean = h.perm_mean;
            entry.perm_std = h.perm_std;
            if (std::isfinite(h.perm_std) && h.perm_std > 0.0) {
                entry.z = (h.loss - h.perm_mean) / h.perm_std;
                if (cumulative_defined) cumulative += *entry.z;
            } else {
                entry.z = std::nullopt; // permutation baseline degenerate
                cumulative_defined = false;
            }
        } else {
            entry.loss = entry.perm_mean = entry.perm_std =
                std::numeric_limits<double>::quiet_NaN();
        }
        report.per_d.push_back(entry);
    }
    return report;
}

} // namespace ssacpd
