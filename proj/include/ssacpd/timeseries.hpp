#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ssacpd/linalg.hpp"

namespace ssacpd {

// Multichannel signal, one row per channel, one column per time sample.
struct TimeSeries {
    Matrix data; // D x T
    std::vector<std::string> channel_names; // empty or D entries

    TimeSeries() = default;
    explicit TimeSeries(Matrix values, std::vector<std::string> names = {});

    Index channels() const { return data.rows(); }
    Index samples() const { return data.cols(); }
};

// Contiguous, non-overlapping epochs covering the prefix [0, covered).
// `boundaries` holds the n-1 interior split indices.
struct Epoching {
    std::vector<Index> boundaries;
    Index covered = 0;

    Epoching() = default;
    Epoching(std::vector<Index> interior_boundaries, Index covered_end);

    Index n_epochs() const { return static_cast<Index>(boundaries.size()) + 1; }
    Index epoch_start(Index i) const { return i == 0 ? 0 : boundaries[i - 1]; }
    Index epoch_end(Index i) const {
        return i + 1 == n_epochs() ? covered : boundaries[i];
    }
    Index epoch_len(Index i) const { return epoch_end(i) - epoch_start(i); }
    // Sample index of boundary b (0-based, between epoch b and b+1).
    Index boundary_sample(Index b) const { return boundaries[b]; }
};

// Per-epoch first and second moments. Covariances use the unbiased divisor.
struct EpochStats {
    std::vector<Vector> means;
    std::vector<Matrix> covariances;
    std::vector<Index> counts;

    EpochStats() = default;
    EpochStats(std::vector<Vector> mu, std::vector<Matrix> sigma, std::vector<Index> n);

    Index n_epochs() const { return static_cast<Index>(means.size()); }
    Index dim() const { return means.empty() ? 0 : means.front().size(); }
    Index total_count() const;

    Vector mean_of_means() const;          // (1/n) sum mu_i
    Matrix pooled_second_moment() const;   // (1/n) sum [Sigma_i + (mu_i - m)(mu_i - m)^T], m = mean_of_means
};

// Affine transform y = W (x - shift) placing the data in the normalized frame
// where the average epoch mean is zero and the average epoch covariance is
// the identity.
struct WhiteningTransform {
    Vector shift;  // D
    Matrix matrix; // D x D

    Index dim() const { return shift.size(); }
    TimeSeries apply(const TimeSeries& series) const;
    EpochStats apply(const EpochStats& stats) const;
    Matrix inverse() const;
};

Epoching make_epochs(Index n_samples, int n_epochs);
Epoching make_epochs(const TimeSeries& series, int n_epochs);

EpochStats epoch_stats(const TimeSeries& series, const Epoching& epochs);

WhiteningTransform fit_whitening(const EpochStats& stats);

// Linear image of the stats: {B mu_i, sym(B Sigma_i B^T), N_i}.
EpochStats transform_stats(const EpochStats& stats, const Eigen::Ref<const Matrix>& projection);

} // namespace ssacpd
