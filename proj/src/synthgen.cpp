#include "ssacpd/synthgen.hpp"

#include <cmath>
#include <string>

#include "ssacpd/seeding.hpp"

namespace ssacpd {

void SynthConfig::validate() const {
    if (D < 1 || d_s < 0 || d_n < 1 || d_s + d_n != D) {
        throw ValidationError("SynthConfig: need d_s >= 0, d_n >= 1, d_s + d_n = D");
    }
    if (n_epochs < 2 || epoch_len < 2) {
        throw ValidationError("SynthConfig: need n_epochs >= 2 and epoch_len >= 2");
    }
    if (p <= 1.0) throw ValidationError("SynthConfig: p must exceed 1");
    if (n_states < 2) throw ValidationError("SynthConfig: need at least 2 states");
    if (p_stay < 0.0 || p_stay > 1.0) throw ValidationError("SynthConfig: p_stay in [0,1]");
    if (mixing == MixingKind::random_conditioned && condition < 1.0) {
        throw ValidationError("SynthConfig: condition number must be >= 1");
    }
}

std::vector<double> variance_grid(double p) {
    const double lo = std::log(1.0 / p);
    const double hi = std::log(p);
    std::vector<double> grid(5);
    for (int i = 0; i < 5; ++i) grid[i] = std::exp(lo + (hi - lo) * i / 4.0);
    return grid;
}

std::vector<Vector> sample_state_covariances(const SynthConfig& config, std::mt19937_64& rng) {
    const std::vector<double> grid = variance_grid(config.p);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(grid.size()) - 1);
    std::vector<Vector> covs(config.n_states);
    for (int k = 0; k < config.n_states; ++k) {
        Vector diag(config.d_n);
        for (int j = 0; j < config.d_n; ++j) diag(j) = grid[pick(rng)];
        covs[k] = diag;
    }
    return covs;
}

std::vector<int> sample_state_sequence(const SynthConfig& config, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> uniform_state(0, config.n_states - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> seq(config.n_epochs);
    seq[0] = uniform_state(rng);
    for (int i = 1; i < config.n_epochs; ++i) {
        if (unit(rng) < config.p_stay) {
            seq[i] = seq[i - 1];
        } else {
            // uniform over the other states
            std::uniform_int_distribution<int> other(0, config.n_states - 2);
            int s = other(rng);
            seq[i] = (s >= seq[i - 1]) ? s + 1 : s;
        }
    }
    return seq;
}

namespace {

Matrix sample_mixing(const SynthConfig& config, std::mt19937_64& rng) {
    switch (config.mixing) {
        case MixingKind::identity:
            return Matrix::Identity(config.D, config.D);
        case MixingKind::random_orthogonal:
            return random_rotation(config.D, rng);
        case MixingKind::random_conditioned: {
            // U diag(s) V^T with singular values log-spaced in [1, condition].
            Matrix u = random_rotation(config.D, rng);
            Matrix v = random_rotation(config.D, rng);
            Vector s(config.D);
            for (int i = 0; i < config.D; ++i) {
                double t = config.D == 1 ? 0.0 : static_cast<double>(i) / (config.D - 1);
                s(i) = std::exp(t * std::log(config.condition));
            }
            Matrix a = u * s.asDiagonal() * v.transpose();
            Eigen::JacobiSVD<Matrix> svd(a);
            double cond = svd.singularValues()(0) / svd.singularValues()(config.D - 1);
            if (cond < 1.0 - 1e-9 || cond > config.condition * (1.0 + 1e-9)) {
                throw NumericalError("sample_mixing: condition number " + std::to_string(cond) +
                                     " outside [1, " + std::to_string(config.condition) + "]");
            }
            return a;
        }
    }
    throw ValidationError("sample_mixing: unknown mixing kind");
}

} // namespace

SynthDataset generate(const SynthConfig& config) {
    config.validate();
    SynthDataset ds;
    ds.n_epochs = config.n_epochs;
    ds.epoch_len = config.epoch_len;

    auto rng_covs = make_rng(config.seed, "state_covs");
    ds.state_covs = sample_state_covariances(config, rng_covs);
    auto rng_states = make_rng(config.seed, "state_seq");
    ds.state_seq = sample_state_sequence(config, rng_states);
    auto rng_mix = make_rng(config.seed, "mixing");
    ds.true_mixing = sample_mixing(config, rng_mix);

    for (int i = 0; i + 1 < config.n_epochs; ++i) {
        if (ds.state_seq[i + 1] != ds.state_seq[i]) ds.true_changepoints.push_back(i);
    }

    const Index total = static_cast<Index>(config.n_epochs) * config.epoch_len;
    Matrix sources(config.D, total);
    auto rng_noise = make_rng(config.seed, "sources");
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int e = 0; e < config.n_epochs; ++e) {
        const Vector& diag = ds.state_covs[ds.state_seq[e]];
        const Index off = static_cast<Index>(e) * config.epoch_len;
        for (Index t = 0; t < config.epoch_len; ++t) {
            for (int c = 0; c < config.d_s; ++c) sources(c, off + t) = gauss(rng_noise);
            for (int c = 0; c < config.d_n; ++c) {
                sources(config.d_s + c, off + t) = std::sqrt(diag(c)) * gauss(rng_noise);
            }
        }
    }
    ds.series = TimeSeries(ds.true_mixing * sources);
    return ds;
}

std::vector<bool> SynthDataset::boundary_truth() const {
    std::vector<bool> truth(static_cast<std::size_t>(n_epochs) - 1, false);
    for (Index b : true_changepoints) truth[static_cast<std::size_t>(b)] = true;
    return truth;
}

Matrix random_projection(int D, int d, std::mt19937_64& rng) {
    if (d > D || d < 1) throw ValidationError("random_projection: need 1 <= d <= D");
    return random_orthonormal_rows(D, d, rng);
}

} // namespace ssacpd
