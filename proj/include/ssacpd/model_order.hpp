#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ssacpd/ssa.hpp"
#include "ssacpd/timeseries.hpp"

namespace ssacpd {

// Regularized lower incomplete gamma P(dof/2, x/2), series/continued-fraction
// crossover; monotone in x, absolute accuracy well below 1e-10.
double chi2_cdf(double x, double dof);

struct StationarityTest {
    double lambda = 0;  // -2 log likelihood ratio
    double dof = 0;     // N d (d+3) / 2
    double p_value = 1;
};

// Likelihood ratio of "every epoch standard normal" against "every epoch its
// own Gaussian", evaluated from epoch moments with ML covariances. Stats that
// fail the normalization precondition are re-whitened in place first.
StationarityTest likelihood_ratio_statistic(const EpochStats& projected, int d);

struct OrderSelection {
    double alpha = 0.01;
    std::vector<StationarityTest> per_d; // index i holds candidate d_s' = i+1
    int chosen_d_s = 0;                  // 0 when every candidate rejects
};

// Fit the s-projection for every candidate d_s' in 1..D-1, test the projected
// sources for stationarity, and keep the largest candidate that is not
// rejected at `alpha`.
OrderSelection select_order(const EpochStats& whitened, const SsaConfig& base,
                            double alpha);

struct HoldoutConfig {
    int n_epochs = 10;       // per half
    int n_permutations = 20;
    std::uint64_t seed = 0;
    SsaConfig ssa;
};

struct HoldoutResult {
    double loss = 0;       // second-half objective of the first-half fit
    double perm_mean = 0;  // over time-permuted copies
    double perm_std = 0;   // NaN when n_permutations < 2
};

HoldoutResult holdout_stationarity_check(const TimeSeries& series, int d_s,
                                         const HoldoutConfig& config);

struct BniseEntry {
    int d = 0;
    double loss = 0, perm_mean = 0, perm_std = 0;
    std::optional<double> z;     // standardized excess loss of candidate d
    std::optional<double> bnise; // cumulative sum of z over candidates < d
};

struct BniseReport {
    std::vector<BniseEntry> per_d;
    int n_permutations = 0;
    std::uint64_t seed = 0;
};

BniseReport bnise(const TimeSeries& series, int up_to_d, const HoldoutConfig& config);

} // namespace ssacpd
