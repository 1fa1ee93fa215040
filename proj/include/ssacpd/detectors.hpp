#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssacpd/timeseries.hpp"

namespace ssacpd {

enum class DetectorKind { slcd, cusum, kohlmorgen_lemm };

std::string detector_name(DetectorKind kind);
DetectorKind detector_from_name(const std::string& name);

// Common detector output: one flag and one score per epoch boundary,
// higher scores meaning more change-like.
struct ChangePointReport {
    DetectorKind detector = DetectorKind::slcd;
    double tau = 0;
    std::vector<bool> flags;    // n-1
    std::vector<double> scores; // n-1

    Index n_boundaries() const { return static_cast<Index>(flags.size()); }
};

// ---- Single linkage clustering with symmetrized divergence ----

struct SlcdConfig {
    int n_epochs = 200;
    int k_clusters = 5; // tau
};

// Symmetrized Gaussian KL between all epoch pairs. Covariances receive a
// trace-scaled ridge before inversion; zero diagonal.
Matrix slcd_distance_matrix(const EpochStats& stats);

// Agglomerative single linkage down to k clusters; ties broken towards the
// lexicographically lowest cluster pair. Labels are canonical: the cluster of
// epoch 0 gets label 0, the next unseen cluster label 1, and so on.
std::vector<int> single_linkage_cluster(const Matrix& dist, int k);

ChangePointReport slcd_detect(const TimeSeries& series, const SlcdConfig& config);
ChangePointReport slcd_detect(const TimeSeries& series, const Epoching& epochs, int k_clusters);

// ---- Weighted CUSUM for variance changes (univariate) ----

struct CusumConfig {
    int window = 100;
    double threshold = 10.0; // tau: alarm level h on ln of the weighted ratio
    // Candidate variance grid {c, c+b, ..., d}; when no explicit range is
    // given, c and d are scaled from the initial variance estimate.
    double grid_lo_factor = 0.2;
    double grid_hi_factor = 5.0;
    int grid_points = 25;
    std::optional<std::pair<double, double>> grid_range;
};

ChangePointReport cusum_detect(const TimeSeries& series, const Epoching& epochs,
                               const CusumConfig& config);

// ---- Kohlmorgen/Lemm kernel-density segmentation ----

struct KohlLemmConfig {
    int window = 50;     // samples per epoch used for the density estimate
    double sigma = 0.0;  // kernel width; <= 0 means the nearest-neighbor rule
    double cost = 1.0;   // tau: transition cost C
    std::optional<int> fixed_n_changepoints;
    int score_grid = 32; // cost values swept for the boundary scores
};

// Squared L2 distance between the Gaussian kernel density estimates of two
// equal-length sample windows (columns are samples).
double kohlmorgen_lemm_distance(const Matrix& epoch_a, const Matrix& epoch_b, double sigma);

// Kernel width rule: mean distance of each point to its D nearest neighbors,
// evaluated on an evenly strided subsample of at most `max_points` columns.
double kde_sigma_rule(const TimeSeries& series, Index max_points = 512);

ChangePointReport kohlmorgen_lemm_detect(const TimeSeries& series, const Epoching& epochs,
                                         const KohlLemmConfig& config,
                                         double* sigma_used = nullptr);

// Optimal state sequence for the given per-epoch distance matrix and
// transition cost; states are epoch indices. Exposed for tests.
std::vector<int> kohlmorgen_lemm_states(const Matrix& dist, double cost,
                                        std::optional<int> fixed_n_changepoints = std::nullopt);

} // namespace ssacpd
