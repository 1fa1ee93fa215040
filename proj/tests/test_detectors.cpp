#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ssacpd/detectors.hpp"
#include "ssacpd/evaluation.hpp"
#include "ssacpd/gaussian.hpp"
#include "ssacpd/seeding.hpp"
#include "ssacpd/synthgen.hpp"

using namespace ssacpd;

namespace {

TimeSeries gaussian_series(Index channels, Index samples, std::uint64_t seed, double sd = 1.0) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, sd);
    Matrix m(channels, samples);
    for (Index i = 0; i < channels; ++i)
        for (Index t = 0; t < samples; ++t) m(i, t) = gauss(rng);
    return TimeSeries(std::move(m));
}

// variance switches between regimes at fixed epochs
TimeSeries two_regime_series(Index samples, Index change_at, double var2, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(1, samples);
    for (Index t = 0; t < samples; ++t) {
        m(0, t) = gauss(rng) * (t < change_at ? 1.0 : std::sqrt(var2));
    }
    return TimeSeries(std::move(m));
}

} // namespace

TEST_SUITE("detectors") {

TEST_CASE("slcd distance matrix basics") {
    Vector zero = Vector::Zero(1);
    Matrix v1(1, 1), v4(1, 1);
    v1 << 1.0;
    v4 << 4.0;
    EpochStats stats({zero, zero, zero}, {v1, v1, v4}, {100, 100, 100});
    Matrix d = slcd_distance_matrix(stats);
    CHECK(d.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(d(0, 1) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(d(0, 2) == doctest::Approx(d(1, 2)).epsilon(1e-12));
    CHECK(d(0, 2) > 0.1);
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("slcd distance matrix matches the closed-form divergence") {
    TimeSeries series = gaussian_series(3, 600, 3);
    EpochStats stats = epoch_stats(series, make_epochs(600, 6));
    Matrix d = slcd_distance_matrix(stats);
    for (Index i = 0; i < 6; ++i) {
        for (Index j = 0; j < 6; ++j) {
            if (i == j) continue;
            Matrix ci = stats.covariances[i] +
                        1e-9 * stats.covariances[i].trace() / 3.0 * Matrix::Identity(3, 3);
            Matrix cj = stats.covariances[j] +
                        1e-9 * stats.covariances[j].trace() / 3.0 * Matrix::Identity(3, 3);
            double expected = kl_gauss_symmetrized(stats.means[i], ci, stats.means[j], cj);
            CHECK(d(i, j) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("single linkage trivial cluster counts") {
    TimeSeries series = gaussian_series(2, 300, 5);
    EpochStats stats = epoch_stats(series, make_epochs(300, 6));
    Matrix d = slcd_distance_matrix(stats);
    auto each_own = single_linkage_cluster(d, 6);
    std::vector<int> expected{0, 1, 2, 3, 4, 5};
    CHECK(each_own == expected);
    auto one = single_linkage_cluster(d, 1);
    for (int label : one) CHECK(label == 0);
    CHECK_THROWS_AS(single_linkage_cluster(d, 0), ValidationError);
}

TEST_CASE("single linkage matches the max-min split on a line") {
    // points 0, 0.1, 10, 10.1: the two-cluster split {0,1},{2,3} maximizes the
    // smallest cross-cluster distance over all 2-partitions
    Matrix d(4, 4);
    std::vector<double> x{0.0, 0.1, 10.0, 10.1};
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j) d(i, j) = std::abs(x[i] - x[j]);
    auto labels = single_linkage_cluster(d, 2);
    CHECK(labels[0] == labels[1]);
    CHECK(labels[2] == labels[3]);
    CHECK(labels[0] != labels[2]);

    double best = -1.0;
    int best_mask = 0;
    for (int mask = 1; mask < 8; ++mask) { // point 3 fixed in cluster B
        double min_cross = 1e300;
        for (int i = 0; i < 4; ++i) {
            bool a_i = i < 3 ? ((mask >> i) & 1) : false;
            for (int j = 0; j < 4; ++j) {
                bool a_j = j < 3 ? ((mask >> j) & 1) : false;
                if (a_i != a_j) min_cross = std::min(min_cross, d(i, j));
            }
        }
        if (min_cross > best) {
            best = min_cross;
            best_mask = mask;
        }
    }
    CHECK(best_mask == 3); // {0,1} vs {2,3}
}

TEST_CASE("slcd report flags changes between clusters") {
    SynthConfig cfg;
    cfg.D = 4;
    cfg.d_s = 2;
    cfg.d_n = 2;
    cfg.n_epochs = 40;
    cfg.epoch_len = 150;
    cfg.p = 6.0;
    cfg.seed = 31;
    SynthDataset ds = generate(cfg);
    ChangePointReport report = slcd_detect(ds.series, ds.epochs(), 5);
    CHECK(report.n_boundaries() == 39);
    // flags re-derivable from the distance matrix and tau
    EpochStats stats = epoch_stats(ds.series, ds.epochs());
    auto labels = single_linkage_cluster(slcd_distance_matrix(stats), 5);
    for (Index i = 0; i + 1 < 40; ++i) {
        CHECK(report.flags[static_cast<std::size_t>(i)] == (labels[i] != labels[i + 1]));
    }
    auto truth = ds.boundary_truth();
    RocCurve roc = roc_from_scores(report.scores, truth);
    CHECK(roc.auc > 0.7);
}

TEST_CASE("slcd on stationary data: single cluster stays quiet") {
    TimeSeries series = gaussian_series(3, 4000, 7);
    ChangePointReport report = slcd_detect(series, make_epochs(series, 20), 1);
    for (bool f : report.flags) CHECK_FALSE(f);
}

TEST_CASE("slcd is equivariant under channel permutation") {
    TimeSeries series = gaussian_series(4, 2000, 11);
    Epoching epochs = make_epochs(series, 10);
    ChangePointReport a = slcd_detect(series, epochs, 4);
    Matrix permuted(4, series.samples());
    std::vector<int> perm{2, 0, 3, 1};
    for (int i = 0; i < 4; ++i) permuted.row(i) = series.data.row(perm[i]);
    ChangePointReport b = slcd_detect(TimeSeries(permuted), epochs, 4);
    CHECK(a.flags == b.flags);
    for (std::size_t i = 0; i < a.scores.size(); ++i) {
        CHECK(a.scores[i] == doctest::Approx(b.scores[i]).epsilon(1e-12));
    }
}

TEST_CASE("cusum single-theta window reduces to the weighting constant") {
    // alternating +-1 has exact unit variance; a one-point grid at the same
    // theta leaves only the 1/b factor
    Matrix m(1, 40);
    for (Index t = 0; t < 40; ++t) m(0, t) = (t % 2 == 0) ? 1.0 : -1.0;
    TimeSeries series(m);
    CusumConfig cfg;
    cfg.window = 4;
    cfg.threshold = 100.0;
    cfg.grid_points = 1;
    cfg.grid_range = std::make_pair(1.0, 3.0); // grid {1.0}, b = 2
    Epoching epochs = make_epochs(40, 4);
    ChangePointReport report = cusum_detect(series, epochs, cfg);
    for (double s : report.scores) {
        if (std::isfinite(s)) CHECK(s == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("cusum input validation") {
    TimeSeries multi = gaussian_series(3, 500, 1);
    CusumConfig cfg;
    CHECK_THROWS_AS(cusum_detect(multi, make_epochs(500, 5), cfg), ValidationError);
    TimeSeries one = gaussian_series(1, 500, 1);
    CusumConfig bad;
    bad.grid_range = std::make_pair(-1.0, 2.0);
    CHECK_THROWS_AS(cusum_detect(one, make_epochs(500, 5), bad), ValidationError);
    CusumConfig tiny;
    tiny.window = 400;
    CHECK_THROWS_AS(cusum_detect(one, make_epochs(500, 5), tiny), ValidationError);
}

TEST_CASE("cusum stays quiet on a constant-variance stream") {
    // Null calibration: the per-trial max of the statistic over T=1e4 and
    // W=100 has median ~9 and was observed up to ~33 across these 50 null
    // streams, so the alarm level is frozen above the null range.
    CusumConfig cfg;
    cfg.window = 100;
    cfg.threshold = 40.0;
    int total_alarms = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        TimeSeries series = gaussian_series(1, 10000, 900 + seed);
        Epoching epochs = make_epochs(10000, 20);
        ChangePointReport report = cusum_detect(series, epochs, cfg);
        for (bool f : report.flags) total_alarms += f ? 1 : 0;
    }
    CHECK(total_alarms == 0);
}

TEST_CASE("cusum catches a strong variance step quickly") {
    CusumConfig cfg;
    cfg.window = 100;
    cfg.threshold = 40.0; // null-calibrated level
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        TimeSeries series = two_regime_series(10000, 5000, 9.0, 700 + seed);
        // fine epochs so that the alarm-to-boundary mapping is sharp
        Epoching epochs = make_epochs(10000, 100);
        ChangePointReport report = cusum_detect(series, epochs, cfg);
        bool hit = false;
        for (Index b = 0; b < report.n_boundaries(); ++b) {
            if (!report.flags[static_cast<std::size_t>(b)]) continue;
            Index alarm_zone = epochs.boundary_sample(b);
            if (std::abs(alarm_zone - 5000) <= 2 * cfg.window) hit = true;
        }
        hits += hit ? 1 : 0;
    }
    CHECK(hits >= 45);
}

TEST_CASE("cusum flags are re-derivable from scores and tau") {
    TimeSeries series = two_regime_series(6000, 3000, 6.0, 42);
    Epoching epochs = make_epochs(6000, 30);
    CusumConfig cfg;
    cfg.window = 80;
    cfg.threshold = 8.0;
    ChangePointReport report = cusum_detect(series, epochs, cfg);
    for (std::size_t b = 0; b < report.flags.size(); ++b) {
        CHECK(report.flags[b] == (report.scores[b] >= cfg.threshold));
    }
}

TEST_CASE("cusum alarm behavior is monotone in the threshold") {
    // After an alarm the baseline variance is re-estimated, so reruns at
    // different thresholds follow different paths and the literal set of
    // flagged boundaries need not nest. Two forms of monotonicity do hold
    // and are asserted: thresholding one run's recorded statistic yields
    // nested boundary sets, and the first alarm can only move later as the
    // threshold grows (the statistic trace is identical up to that point).
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        TimeSeries series = two_regime_series(8000, 4000, 7.0, 1300 + seed);
        Epoching epochs = make_epochs(8000, 40);
        CusumConfig cfg;
        cfg.window = 100;
        cfg.threshold = 6.0;
        ChangePointReport run = cusum_detect(series, epochs, cfg);
        std::vector<bool> prev(run.flags.size(), true);
        for (double level : {6.0, 12.0, 24.0, 48.0}) {
            std::vector<bool> at_level(run.flags.size());
            for (std::size_t i = 0; i < run.scores.size(); ++i) {
                at_level[i] = run.scores[i] >= level;
            }
            for (std::size_t i = 0; i < at_level.size(); ++i) {
                if (at_level[i]) CHECK(prev[i]);
            }
            prev = at_level;
        }
        auto first_alarm = [&](double h) {
            CusumConfig c = cfg;
            c.threshold = h;
            ChangePointReport rep = cusum_detect(series, epochs, c);
            for (std::size_t i = 0; i < rep.flags.size(); ++i) {
                if (rep.flags[i]) return static_cast<int>(i);
            }
            return static_cast<int>(rep.flags.size());
        };
        int prev_first = -1;
        for (double h : {6.0, 12.0, 24.0}) {
            int f = first_alarm(h);
            CHECK(f >= prev_first);
            prev_first = f;
        }
    }
}

TEST_CASE("kernel density distance closed forms") {
    Matrix a(1, 1), b(1, 1);
    a << 0.3;
    b << 1.1;
    double sigma = 0.7;
    double expected = std::pow(4.0 * std::numbers::pi * sigma * sigma, -0.5) * 2.0 *
                      (1.0 - std::exp(-(0.8 * 0.8) / (4.0 * sigma * sigma)));
    CHECK(kohlmorgen_lemm_distance(a, b, sigma) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(kohlmorgen_lemm_distance(a, a, sigma) == doctest::Approx(0.0));
}

TEST_CASE("kernel density distance is symmetric and nonnegative") {
    auto rng = make_rng(19);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        Index d = 1 + trial % 3;
        Index w = 2 + trial % 5;
        Matrix a(d, w), b(d, w);
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < w; ++j) {
                a(i, j) = gauss(rng);
                b(i, j) = gauss(rng) + 0.5;
            }
        double ab = kohlmorgen_lemm_distance(a, b, 0.8);
        double ba = kohlmorgen_lemm_distance(b, a, 0.8);
        CHECK(ab >= -1e-12);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    }
}

TEST_CASE("kernel density distance matches quadrature") {
    auto rng = make_rng(23);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix a(1, 6), b(1, 6);
    for (Index j = 0; j < 6; ++j) {
        a(0, j) = gauss(rng);
        b(0, j) = gauss(rng) + 1.0;
    }
    const double sigma = 0.6;
    // direct quadrature of the squared difference of the two KDEs
    auto kde = [&](const Matrix& pts, double x) {
        double val = 0.0;
        for (Index j = 0; j < pts.cols(); ++j) {
            double z = x - pts(0, j);
            val += std::exp(-z * z / (2.0 * sigma * sigma));
        }
        return val / (pts.cols() * std::sqrt(2.0 * std::numbers::pi) * sigma);
    };
    const double lo = -12.0, hi = 13.0;
    const int steps = 200000;
    double integral = 0.0;
    for (int i = 0; i < steps; ++i) {
        double x = lo + (hi - lo) * (i + 0.5) / steps;
        double diff = kde(a, x) - kde(b, x);
        integral += diff * diff;
    }
    integral *= (hi - lo) / steps;
    double direct = kohlmorgen_lemm_distance(a, b, sigma);
    CHECK(direct == doctest::Approx(integral).epsilon(1e-4));
}

TEST_CASE("sigma rule on a grid and under scaling") {
    Matrix m(1, 101);
    for (Index t = 0; t <= 100; ++t) m(0, t) = 0.25 * t;
    TimeSeries series(m);
    CHECK(kde_sigma_rule(series) == doctest::Approx(0.25).epsilon(1e-12));
    TimeSeries scaled(Matrix(3.0 * m));
    CHECK(kde_sigma_rule(scaled) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("sigma rule equals a brute-force nearest-neighbor computation") {
    TimeSeries series = gaussian_series(2, 200, 29);
    double sigma = kde_sigma_rule(series, 128);
    // independent recomputation with a full sort
    std::vector<Index> picks;
    for (Index j = 0; j < 128; ++j) picks.push_back(j * 200 / 128);
    double acc = 0.0;
    for (Index i = 0; i < 128; ++i) {
        std::vector<double> dists;
        for (Index j = 0; j < 128; ++j) {
            if (j == i) continue;
            dists.push_back((series.data.col(picks[static_cast<std::size_t>(i)]) -
                             series.data.col(picks[static_cast<std::size_t>(j)]))
                                .norm());
        }
        std::sort(dists.begin(), dists.end());
        acc += 0.5 * (dists[0] + dists[1]); // D = 2 nearest neighbors
    }
    CHECK(sigma == doctest::Approx(acc / 128.0).epsilon(1e-12));
    Matrix flat = Matrix::Zero(1, 50);
    CHECK_THROWS_AS(kde_sigma_rule(TimeSeries(flat)), NumericalError);
}

TEST_CASE("kohlmorgen-lemm cost extremes") {
    TimeSeries series = two_regime_series(1200, 600, 9.0, 51);
    Epoching epochs = make_epochs(1200, 12);
    KohlLemmConfig huge;
    huge.window = 50;
    huge.cost = 1e9;
    ChangePointReport none = kohlmorgen_lemm_detect(series, epochs, huge);
    for (bool f : none.flags) CHECK_FALSE(f);

    KohlLemmConfig zero;
    zero.window = 50;
    zero.cost = 0.0;
    ChangePointReport all = kohlmorgen_lemm_detect(series, epochs, zero);
    // generic continuous data: every epoch is strictly closest to itself
    for (bool f : all.flags) CHECK(f);
}

TEST_CASE("kohlmorgen-lemm finds a single strong change, free and fixed mode") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        TimeSeries series = two_regime_series(720, 360, 9.0, 2000 + seed);
        Epoching epochs = make_epochs(720, 12); // true boundary at index 5
        KohlLemmConfig cfg;
        cfg.window = 30;
        cfg.cost = 1.0;
        ChangePointReport probe = kohlmorgen_lemm_detect(series, epochs, cfg);
        // moderate cost: between the two largest boundary survival levels
        std::vector<double> sc = probe.scores;
        std::sort(sc.begin(), sc.end());
        cfg.cost = std::sqrt(sc[10] * std::max(1e-12, sc[9]));
        ChangePointReport free_run = kohlmorgen_lemm_detect(series, epochs, cfg);
        int n_flags = 0;
        Index where = -1;
        for (Index b = 0; b < free_run.n_boundaries(); ++b) {
            if (free_run.flags[static_cast<std::size_t>(b)]) {
                ++n_flags;
                where = b;
            }
        }
        if (n_flags == 1 && std::abs(where - 5) <= 1) {
            KohlLemmConfig fixed = cfg;
            fixed.fixed_n_changepoints = 1;
            ChangePointReport fixed_run = kohlmorgen_lemm_detect(series, epochs, fixed);
            if (fixed_run.flags == free_run.flags) ++hits;
        }
    }
    CHECK(hits >= 27);
}

TEST_CASE("kohlmorgen-lemm boundary sets shrink as the cost grows") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        SynthConfig cfg;
        cfg.D = 2;
        cfg.d_s = 1;
        cfg.d_n = 1;
        cfg.n_epochs = 14;
        cfg.epoch_len = 80;
        cfg.p = 5.0;
        cfg.seed = 600 + seed;
        SynthDataset ds = generate(cfg);
        Epoching epochs = ds.epochs();
        KohlLemmConfig kcfg;
        kcfg.window = 40;
        double sigma = kde_sigma_rule(ds.series);
        std::vector<bool> prev;
        for (double cost : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
            kcfg.cost = cost;
            kcfg.sigma = sigma;
            ChangePointReport rep = kohlmorgen_lemm_detect(ds.series, epochs, kcfg);
            if (!prev.empty()) {
                for (std::size_t i = 0; i < prev.size(); ++i) {
                    if (rep.flags[i]) CHECK(prev[i]);
                }
            }
            prev = rep.flags;
        }
    }
}

TEST_CASE("kohlmorgen-lemm flags are re-derivable from scores at tau") {
    SynthConfig cfg;
    cfg.D = 2;
    cfg.d_s = 1;
    cfg.d_n = 1;
    cfg.n_epochs = 12;
    cfg.epoch_len = 100;
    cfg.p = 6.0;
    cfg.seed = 71;
    SynthDataset ds = generate(cfg);
    KohlLemmConfig kcfg;
    kcfg.window = 50;
    kcfg.cost = 0.01;
    ChangePointReport rep = kohlmorgen_lemm_detect(ds.series, ds.epochs(), kcfg);
    for (std::size_t b = 0; b < rep.flags.size(); ++b) {
        CHECK(rep.flags[b] == (rep.scores[b] >= kcfg.cost));
    }
}

TEST_CASE("kohlmorgen-lemm is equivariant under channel permutation") {
    TimeSeries series = gaussian_series(3, 1200, 83);
    Epoching epochs = make_epochs(series, 12);
    KohlLemmConfig cfg;
    cfg.window = 40;
    cfg.cost = 0.05;
    ChangePointReport a = kohlmorgen_lemm_detect(series, epochs, cfg);
    Matrix permuted(3, series.samples());
    std::vector<int> perm{1, 2, 0};
    for (int i = 0; i < 3; ++i) permuted.row(i) = series.data.row(perm[i]);
    ChangePointReport b = kohlmorgen_lemm_detect(TimeSeries(permuted), epochs, cfg);
    CHECK(a.flags == b.flags);
    for (std::size_t i = 0; i < a.scores.size(); ++i) {
        CHECK(a.scores[i] == doctest::Approx(b.scores[i]).epsilon(1e-9));
    }
}

TEST_CASE("distance window length mismatch is rejected") {
    Matrix a(1, 3), b(1, 4);
    a.setZero();
    b.setZero();
    CHECK_THROWS_AS(kohlmorgen_lemm_distance(a, b, 1.0), ValidationError);
}

} // TEST_SUITE
