#include "ssacpd/timeseries.hpp"

#include <algorithm>
#include <string>

namespace ssacpd {

TimeSeries::TimeSeries(Matrix values, std::vector<std::string> names)
    : data(std::move(values)), channel_names(std::move(names)) {
    if (data.rows() < 1 || data.cols() < 2) {
        throw ValidationError("TimeSeries: need at least 1 channel and 2 samples, got " +
                              std::to_string(data.rows()) + " x " + std::to_string(data.cols()));
    }
    if (!data.allFinite()) {
        throw ValidationError("TimeSeries: input contains non-finite values");
    }
    if (!channel_names.empty() &&
        static_cast<Index>(channel_names.size()) != data.rows()) {
        throw ValidationError("TimeSeries: channel_names size does not match channel count");
    }
}

Epoching::Epoching(std::vector<Index> interior_boundaries, Index covered_end)
    : boundaries(std::move(interior_boundaries)), covered(covered_end) {
    Index prev = 0;
    for (Index b : boundaries) {
        if (b - prev < 2) throw ValidationError("Epoching: every epoch needs at least 2 samples");
        prev = b;
    }
    if (covered - prev < 2) throw ValidationError("Epoching: every epoch needs at least 2 samples");
}

EpochStats::EpochStats(std::vector<Vector> mu, std::vector<Matrix> sigma, std::vector<Index> n)
    : means(std::move(mu)), covariances(std::move(sigma)), counts(std::move(n)) {
    if (means.size() != covariances.size() || means.size() != counts.size()) {
        throw ValidationError("EpochStats: list lengths differ");
    }
    if (means.empty()) throw ValidationError("EpochStats: empty");
    const Index d = means.front().size();
    for (std::size_t i = 0; i < means.size(); ++i) {
        if (counts[i] < 1) throw ValidationError("EpochStats: non-positive count");
        if (means[i].size() != d || covariances[i].rows() != d || covariances[i].cols() != d) {
            throw ValidationError("EpochStats: inconsistent dimensions");
        }
        const Matrix& s = covariances[i];
        double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
        if (((s - s.transpose()).cwiseAbs().maxCoeff()) > 1e-10 * scale) {
            throw ValidationError("EpochStats: covariance " + std::to_string(i) +
                                  " is not symmetric");
        }
    }
}

Index EpochStats::total_count() const {
    Index total = 0;
    for (Index c : counts) total += c;
    return total;
}

Vector EpochStats::mean_of_means() const {
    Vector m = Vector::Zero(dim());
    for (const Vector& mu : means) m += mu;
    return m / static_cast<double>(n_epochs());
}

Matrix EpochStats::pooled_second_moment() const {
    const Vector m = mean_of_means();
    Matrix s = Matrix::Zero(dim(), dim());
    for (Index i = 0; i < n_epochs(); ++i) {
        Vector dm = means[i] - m;
        s += covariances[i] + dm * dm.transpose();
    }
    return symmetrized(s / static_cast<double>(n_epochs()));
}

TimeSeries WhiteningTransform::apply(const TimeSeries& series) const {
    if (series.channels() != dim()) {
        throw ValidationError("WhiteningTransform: channel count mismatch");
    }
    Matrix out = matrix * (series.data.colwise() - shift);
    return TimeSeries(std::move(out), series.channel_names);
}

EpochStats WhiteningTransform::apply(const EpochStats& stats) const {
    if (stats.dim() != dim()) {
        throw ValidationError("WhiteningTransform: stats dimension mismatch");
    }
    std::vector<Vector> mu(stats.n_epochs());
    std::vector<Matrix> sigma(stats.n_epochs());
    for (Index i = 0; i < stats.n_epochs(); ++i) {
        mu[i] = matrix * (stats.means[i] - shift);
        sigma[i] = symmetrized(matrix * stats.covariances[i] * matrix.transpose());
    }
    return EpochStats(std::move(mu), std::move(sigma), stats.counts);
}

Matrix WhiteningTransform::inverse() const {
    return matrix.partialPivLu().solve(Matrix::Identity(dim(), dim()));
}

Epoching make_epochs(Index n_samples, int n_epochs) {
    if (n_epochs < 2) throw ValidationError("make_epochs: need at least 2 epochs");
    if (n_samples < 2 * static_cast<Index>(n_epochs)) {
        throw ValidationError("make_epochs: too few samples (" + std::to_string(n_samples) +
                              ") for " + std::to_string(n_epochs) + " epochs");
    }
    const Index len = n_samples / n_epochs; // trailing remainder discarded
    std::vector<Index> bounds(n_epochs - 1);
    for (int i = 1; i < n_epochs; ++i) bounds[i - 1] = static_cast<Index>(i) * len;
    return Epoching(std::move(bounds), static_cast<Index>(n_epochs) * len);
}

Epoching make_epochs(const TimeSeries& series, int n_epochs) {
    return make_epochs(series.samples(), n_epochs);
}

EpochStats epoch_stats(const TimeSeries& series, const Epoching& epochs) {
    if (epochs.covered > series.samples()) {
        throw ValidationError("epoch_stats: epoching exceeds series length");
    }
    const Index n = epochs.n_epochs();
    std::vector<Vector> mu(n);
    std::vector<Matrix> sigma(n);
    std::vector<Index> counts(n);
    for (Index i = 0; i < n; ++i) {
        const Index len = epochs.epoch_len(i);
        if (len < 2) throw NumericalError("epoch_stats: degenerate epoch " + std::to_string(i));
        auto block = series.data.middleCols(epochs.epoch_start(i), len);
        mu[i] = block.rowwise().mean();
        Matrix centered = block.colwise() - mu[i];
        sigma[i] = symmetrized(centered * centered.transpose() / static_cast<double>(len - 1));
        counts[i] = len;
    }
    return EpochStats(std::move(mu), std::move(sigma), std::move(counts));
}

WhiteningTransform fit_whitening(const EpochStats& stats) {
    WhiteningTransform w;
    w.shift = stats.mean_of_means();
    w.matrix = inverse_sqrt_spd(stats.pooled_second_moment());
    return w;
}

EpochStats transform_stats(const EpochStats& stats, const Eigen::Ref<const Matrix>& projection) {
    if (projection.cols() != stats.dim()) {
        throw ValidationError("transform_stats: projection has " +
                              std::to_string(projection.cols()) + " columns, stats have dim " +
                              std::to_string(stats.dim()));
    }
    if (projection.rows() > projection.cols()) {
        throw ValidationError("transform_stats: projection has more rows than columns");
    }
    std::vector<Vector> mu(stats.n_epochs());
    std::vector<Matrix> sigma(stats.n_epochs());
    for (Index i = 0; i < stats.n_epochs(); ++i) {
        mu[i] = projection * stats.means[i];
        sigma[i] = symmetrized(projection * stats.covariances[i] * projection.transpose());
    }
    return EpochStats(std::move(mu), std::move(sigma), stats.counts);
}

} // namespace ssacpd
