#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ssacpd/timeseries.hpp"

namespace ssacpd {

enum class MixingKind { identity, random_orthogonal, random_conditioned };

struct SynthConfig {
    int D = 4;
    int d_s = 2;
    int d_n = 2;
    int n_epochs = 30;
    int epoch_len = 500;
    double p = 2.0;       // variance spread of the non-stationary states, > 1
    int n_states = 5;
    double p_stay = 0.9;
    std::uint64_t seed = 0;
    MixingKind mixing = MixingKind::random_orthogonal;
    double condition = 10.0; // for random_conditioned

    void validate() const;
};

struct SynthDataset {
    TimeSeries series;
    Matrix true_mixing;                  // D x D
    std::vector<int> state_seq;          // per epoch
    std::vector<Index> true_changepoints; // boundary indices where the state switches
    std::vector<Vector> state_covs;      // diagonal entries, one vector per state
    int n_epochs = 0;
    int epoch_len = 0;

    Epoching epochs() const { return make_epochs(series.samples(), n_epochs); }
    std::vector<bool> boundary_truth() const;
};

// The five log-spaced variances {1/p, p^{-1/2}, 1, p^{1/2}, p}.
std::vector<double> variance_grid(double p);

std::vector<Vector> sample_state_covariances(const SynthConfig& config, std::mt19937_64& rng);
std::vector<int> sample_state_sequence(const SynthConfig& config, std::mt19937_64& rng);

SynthDataset generate(const SynthConfig& config);

// d x D with orthonormal rows, QR of a Gaussian matrix.
Matrix random_projection(int D, int d, std::mt19937_64& rng);

} // namespace ssacpd
