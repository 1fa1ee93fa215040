#include <doctest.h>

#include <random>

#include "ssacpd/seeding.hpp"
#include "ssacpd/timeseries.hpp"

using namespace ssacpd;

namespace {

TimeSeries random_series(Index channels, Index samples, std::uint64_t seed) {
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(channels, samples);
    for (Index i = 0; i < channels; ++i)
        for (Index t = 0; t < samples; ++t) m(i, t) = 0.5 + gauss(rng) * (1.0 + 0.1 * i);
    return TimeSeries(std::move(m));
}

} // namespace

TEST_SUITE("timeseries") {

TEST_CASE("series validation") {
    CHECK_THROWS_AS(TimeSeries(Matrix::Zero(2, 1)), ValidationError);
    Matrix bad = Matrix::Zero(2, 4);
    bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(TimeSeries{bad}, ValidationError);
    CHECK_THROWS_AS(TimeSeries(Matrix::Zero(1, 3), {"a", "b"}), ValidationError);
}

TEST_CASE("make_epochs exact division") {
    Epoching e = make_epochs(100, 4);
    CHECK(e.n_epochs() == 4);
    CHECK(e.boundaries == std::vector<Index>{25, 50, 75});
    CHECK(e.covered == 100);
    for (Index i = 0; i < 4; ++i) CHECK(e.epoch_len(i) == 25);
}

TEST_CASE("make_epochs discards the remainder") {
    Epoching e = make_epochs(103, 4);
    CHECK(e.boundaries == std::vector<Index>{25, 50, 75});
    CHECK(e.covered == 100); // samples 100..102 dropped
}

TEST_CASE("make_epochs rejects too-few samples") {
    CHECK_THROWS_AS(make_epochs(7, 4), ValidationError);
    CHECK_THROWS_AS(make_epochs(100, 1), ValidationError);
}

TEST_CASE("epoch stats by hand") {
    Matrix data(1, 4);
    data << 2, 4, 7, 7;
    TimeSeries series(data);
    EpochStats stats = epoch_stats(series, make_epochs(4, 2));
    CHECK(stats.means[0](0) == doctest::Approx(3.0));
    CHECK(stats.covariances[0](0, 0) == doctest::Approx(2.0)); // unbiased divisor
    CHECK(stats.means[1](0) == doctest::Approx(7.0));
    CHECK(stats.covariances[1](0, 0) == doctest::Approx(0.0)); // identical samples
}

TEST_CASE("epoch stats on a symmetric 2-channel epoch") {
    Matrix data(2, 4);
    data << 1, 0, -1, 0,
            0, 1, 0, -1;
    EpochStats stats = epoch_stats(TimeSeries(data), Epoching({}, 4));
    CHECK(stats.means[0].cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(stats.covariances[0](0, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(stats.covariances[0](1, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(stats.covariances[0](0, 1) == doctest::Approx(0.0));
}

TEST_CASE("epoch stats match a two-pass oracle") {
    TimeSeries series = random_series(3, 240, 7);
    Epoching epochs = make_epochs(240, 6);
    EpochStats stats = epoch_stats(series, epochs);
    for (Index e = 0; e < epochs.n_epochs(); ++e) {
        const Index start = epochs.epoch_start(e), len = epochs.epoch_len(e);
        Vector mean = Vector::Zero(3);
        for (Index t = start; t < start + len; ++t) mean += series.data.col(t);
        mean /= static_cast<double>(len);
        Matrix cov = Matrix::Zero(3, 3);
        for (Index t = start; t < start + len; ++t) {
            Vector d = series.data.col(t) - mean;
            cov += d * d.transpose();
        }
        cov /= static_cast<double>(len - 1);
        CHECK((stats.means[e] - mean).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((stats.covariances[e] - cov).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("whitening identity case") {
    // Means all zero and covariances averaging to I leave nothing to correct.
    std::vector<Vector> means{Vector::Zero(2), Vector::Zero(2)};
    Matrix c1(2, 2), c2(2, 2);
    c1 << 1.5, 0.2, 0.2, 0.7;
    c2 << 0.5, -0.2, -0.2, 1.3;
    EpochStats stats({means}, {c1, c2}, {50, 50});
    WhiteningTransform w = fit_whitening(stats);
    CHECK(w.shift.cwiseAbs().maxCoeff() < 1e-12);
    CHECK((w.matrix - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("whitening scalar case") {
    // Pooled variance 4, pooled mean 1: shift 1, scale 1/2.
    Vector m1(1), m2(1);
    m1 << 1.0;
    m2 << 1.0;
    Matrix c(1, 1);
    c << 4.0;
    EpochStats stats({m1, m2}, {c, c}, {10, 10});
    WhiteningTransform w = fit_whitening(stats);
    CHECK(w.shift(0) == doctest::Approx(1.0));
    CHECK(w.matrix(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("whitening normalizes random stats") {
    TimeSeries series = random_series(3, 600, 21);
    EpochStats stats = epoch_stats(series, make_epochs(600, 6));
    WhiteningTransform w = fit_whitening(stats);
    EpochStats white = w.apply(stats);
    CHECK(white.mean_of_means().cwiseAbs().maxCoeff() < 1e-8);
    Matrix avg = white.pooled_second_moment();
    CHECK((avg - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("whitening idempotence") {
    TimeSeries series = random_series(4, 800, 3);
    EpochStats stats = epoch_stats(series, make_epochs(800, 8));
    EpochStats white = fit_whitening(stats).apply(stats);
    WhiteningTransform again = fit_whitening(white);
    CHECK(again.shift.cwiseAbs().maxCoeff() < 1e-8);
    CHECK((again.matrix - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("whitening rejects rank-deficient stats") {
    Vector m = Vector::Zero(2);
    Matrix c(2, 2);
    c << 1.0, 1.0, 1.0, 1.0; // rank one
    EpochStats stats({m, m}, {c, c}, {10, 10});
    CHECK_THROWS_AS(fit_whitening(stats), NumericalError);
}

TEST_CASE("whitening applies consistently to series and stats") {
    TimeSeries series = random_series(3, 300, 5);
    Epoching epochs = make_epochs(300, 5);
    EpochStats stats = epoch_stats(series, epochs);
    WhiteningTransform w = fit_whitening(stats);
    EpochStats direct = w.apply(stats);
    EpochStats via_series = epoch_stats(w.apply(series), epochs);
    for (Index e = 0; e < stats.n_epochs(); ++e) {
        CHECK((direct.means[e] - via_series.means[e]).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((direct.covariances[e] - via_series.covariances[e]).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("transform_stats identity and coordinate selection") {
    TimeSeries series = random_series(3, 300, 11);
    EpochStats stats = epoch_stats(series, make_epochs(300, 5));
    EpochStats same = transform_stats(stats, Matrix::Identity(3, 3));
    CHECK((same.means[2] - stats.means[2]).cwiseAbs().maxCoeff() < 1e-15);
    Matrix e1 = Matrix::Zero(1, 3);
    e1(0, 0) = 1.0;
    EpochStats first = transform_stats(stats, e1);
    CHECK(first.means[1](0) == doctest::Approx(stats.means[1](0)));
    CHECK(first.covariances[1](0, 0) == doctest::Approx(stats.covariances[1](0, 0)));
}

TEST_CASE("transform_stats matches an explicit triple product") {
    TimeSeries series = random_series(4, 400, 13);
    EpochStats stats = epoch_stats(series, make_epochs(400, 4));
    auto rng = make_rng(99);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix b(2, 4);
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 4; ++j) b(i, j) = gauss(rng);
    EpochStats proj = transform_stats(stats, b);
    for (Index e = 0; e < stats.n_epochs(); ++e) {
        Matrix expected = Matrix::Zero(2, 2);
        for (Index i = 0; i < 2; ++i)
            for (Index j = 0; j < 2; ++j)
                for (Index k = 0; k < 4; ++k)
                    for (Index l = 0; l < 4; ++l)
                        expected(i, j) += b(i, k) * stats.covariances[e](k, l) * b(j, l);
        CHECK((proj.covariances[e] - symmetrized(expected)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("transform_stats composes") {
    TimeSeries series = random_series(4, 400, 17);
    EpochStats stats = epoch_stats(series, make_epochs(400, 4));
    auto rng = make_rng(123);
    Matrix b1 = random_orthonormal_rows(4, 3, rng);
    Matrix b2 = random_orthonormal_rows(3, 2, rng);
    EpochStats two_step = transform_stats(transform_stats(stats, b1), b2);
    EpochStats one_step = transform_stats(stats, Matrix(b2 * b1));
    for (Index e = 0; e < stats.n_epochs(); ++e) {
        CHECK((two_step.means[e] - one_step.means[e]).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((two_step.covariances[e] - one_step.covariances[e]).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("transform_stats rejects bad shapes") {
    TimeSeries series = random_series(3, 120, 1);
    EpochStats stats = epoch_stats(series, make_epochs(120, 3));
    CHECK_THROWS_AS(transform_stats(stats, Matrix::Identity(4, 4)), ValidationError);
    CHECK_THROWS_AS(transform_stats(stats, Matrix::Zero(4, 3)), ValidationError);
}

} // TEST_SUITE
