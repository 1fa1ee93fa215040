#include "ssacpd/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "ssacpd/gaussian.hpp"

namespace ssacpd {

std::string detector_name(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::slcd: return "slcd";
        case DetectorKind::cusum: return "cusum";
        case DetectorKind::kohlmorgen_lemm: return "kl";
    }
    return "unknown";
}

DetectorKind detector_from_name(const std::string& name) {
    if (name == "slcd") return DetectorKind::slcd;
    if (name == "cusum") return DetectorKind::cusum;
    if (name == "kl" || name == "kohlmorgen-lemm") return DetectorKind::kohlmorgen_lemm;
    throw ValidationError("unknown detector '" + name + "'");
}

// ---------------------------------------------------------------- SLCD ----

Matrix slcd_distance_matrix(const EpochStats& stats) {
    const Index n = stats.n_epochs();
    const Index d = stats.dim();
    std::vector<Matrix> covs(n);
    for (Index i = 0; i < n; ++i) {
        double ridge = 1e-9 * stats.covariances[i].trace() / static_cast<double>(d);
        covs[i] = stats.covariances[i] + ridge * Matrix::Identity(d, d);
    }
    // Cache each epoch's inverse and log det; each pair is then one product.
    std::vector<Matrix> inv(n);
    std::vector<double> logdet(n);
    for (Index i = 0; i < n; ++i) {
        Eigen::LLT<Matrix> llt(covs[i]);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("slcd_distance_matrix: covariance of epoch " +
                                 std::to_string(i) + " singular after regularization");
        }
        logdet[i] = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        inv[i] = llt.solve(Matrix::Identity(d, d));
    }
    Matrix dist = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            Vector dm = stats.means[j] - stats.means[i];
            double kl_ij = 0.5 * ((inv[j] * covs[i]).trace() + dm.dot(inv[j] * dm) -
                                  static_cast<double>(d) + logdet[j] - logdet[i]);
            double kl_ji = 0.5 * ((inv[i] * covs[j]).trace() + dm.dot(inv[i] * dm) -
                                  static_cast<double>(d) + logdet[i] - logdet[j]);
            dist(i, j) = dist(j, i) = 0.5 * kl_ij + 0.5 * kl_ji;
        }
    }
    return dist;
}

std::vector<int> single_linkage_cluster(const Matrix& dist, int k) {
    const Index n = dist.rows();
    if (k < 1 || k > n) throw ValidationError("single_linkage_cluster: k must be in 1..n");
    // Active clusters keyed by their lowest member; single-link distances kept
    // as a shrinking matrix (Lance-Williams min rule).
    std::vector<std::vector<Index>> members(n);
    std::vector<Index> alive;
    for (Index i = 0; i < n; ++i) {
        members[i] = {i};
        alive.push_back(i);
    }
    Matrix d = dist;
    while (static_cast<int>(alive.size()) > k) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_a = 0, best_b = 1;
        for (std::size_t a = 0; a < alive.size(); ++a) {
            for (std::size_t b = a + 1; b < alive.size(); ++b) {
                double v = d(alive[a], alive[b]);
                if (v < best) {
                    best = v;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        Index ca = alive[best_a], cb = alive[best_b];
        for (Index other : alive) {
            if (other == ca || other == cb) continue;
            d(ca, other) = d(other, ca) = std::min(d(ca, other), d(cb, other));
        }
        members[ca].insert(members[ca].end(), members[cb].begin(), members[cb].end());
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best_b));
    }
    std::vector<int> labels(n, -1);
    int next = 0;
    for (Index i = 0; i < n; ++i) {
        if (labels[i] >= 0) continue;
        for (Index c : alive) {
            if (std::find(members[c].begin(), members[c].end(), i) != members[c].end()) {
                for (Index m : members[c]) labels[m] = next;
                ++next;
                break;
            }
        }
    }
    return labels;
}

ChangePointReport slcd_detect(const TimeSeries& series, const Epoching& epochs, int k_clusters) {
    EpochStats stats = epoch_stats(series, epochs);
    Matrix dist = slcd_distance_matrix(stats);
    std::vector<int> labels = single_linkage_cluster(dist, k_clusters);
    ChangePointReport report;
    report.detector = DetectorKind::slcd;
    report.tau = k_clusters;
    const Index n = epochs.n_epochs();
    report.flags.resize(n - 1);
    report.scores.resize(n - 1);
    for (Index i = 0; i + 1 < n; ++i) {
        report.flags[i] = labels[i] != labels[i + 1];
        report.scores[i] = dist(i, i + 1);
    }
    return report;
}

ChangePointReport slcd_detect(const TimeSeries& series, const SlcdConfig& config) {
    return slcd_detect(series, make_epochs(series, config.n_epochs), config.k_clusters);
}

// --------------------------------------------------------------- CUSUM ----

namespace {

// Log-likelihood of window samples under a zero-mean Gaussian with variance
// theta, from the window's sum of squares.
double window_loglik(double sum_sq, int window, double theta) {
    return -0.5 * window * std::log(2.0 * std::numbers::pi * theta) - sum_sq / (2.0 * theta);
}

struct CusumRun {
    std::vector<Index> alarms;      // sample indices
    std::vector<double> stat;       // ln of the weighted ratio per evaluated time
    std::vector<Index> stat_times;  // matching sample indices
};

CusumRun cusum_run(const Vector& x, int window, double threshold, const std::vector<double>& grid,
                   double grid_step) {
    const Index total = x.size();
    Vector prefix_sq(total + 1);
    prefix_sq(0) = 0.0;
    for (Index t = 0; t < total; ++t) prefix_sq(t + 1) = prefix_sq(t) + x(t) * x(t);
    auto window_sum_sq = [&](Index last) { // window of `window` samples ending at `last`
        return prefix_sq(last + 1) - prefix_sq(last + 1 - window);
    };
    auto window_var = [&](Index last) {
        double mean = 0.0;
        for (Index t = last + 1 - window; t <= last; ++t) mean += x(t);
        mean /= window;
        double ss = 0.0;
        for (Index t = last + 1 - window; t <= last; ++t) ss += (x(t) - mean) * (x(t) - mean);
        return ss / window;
    };

    CusumRun run;
    if (total < 2 * window) return run;
    double theta0 = std::max(window_var(window - 1), 1e-300);
    const double log_b = std::log(grid_step);
    Index tc = window; // 0-based index of the latest sample in the window
    while (tc < total) {
        double s2 = window_sum_sq(tc);
        double lp0 = window_loglik(s2, window, theta0);
        // ln[(1/b) sum_i p_i / p_0] via logsumexp
        double max_l = -std::numeric_limits<double>::infinity();
        std::vector<double> ls(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            ls[i] = window_loglik(s2, window, grid[i]) - lp0;
            max_l = std::max(max_l, ls[i]);
        }
        double sum = 0.0;
        for (double l : ls) sum += std::exp(l - max_l);
        double stat = max_l + std::log(sum) - log_b;
        run.stat.push_back(stat);
        run.stat_times.push_back(tc);
        if (stat >= threshold) {
            run.alarms.push_back(tc);
            tc += window;
            if (tc >= total) break;
            theta0 = std::max(window_var(tc), 1e-300);
        } else {
            tc += 1;
        }
    }
    return run;
}

std::vector<double> cusum_grid(const CusumConfig& config, double theta0, double* step_out) {
    double lo, hi;
    if (config.grid_range) {
        lo = config.grid_range->first;
        hi = config.grid_range->second;
    } else {
        lo = config.grid_lo_factor * theta0;
        hi = config.grid_hi_factor * theta0;
    }
    if (!(lo > 0.0) || hi <= lo || config.grid_points < 1) {
        throw ValidationError("cusum: variance grid must be positive and increasing");
    }
    std::vector<double> grid(config.grid_points);
    double step = config.grid_points == 1 ? (hi - lo) : (hi - lo) / (config.grid_points - 1);
    if (step <= 0.0) step = 1.0;
    for (int i = 0; i < config.grid_points; ++i) grid[i] = lo + step * i;
    if (step_out) *step_out = step;
    return grid;
}

} // namespace

ChangePointReport cusum_detect(const TimeSeries& series, const Epoching& epochs,
                               const CusumConfig& config) {
    if (series.channels() != 1) {
        throw ValidationError("cusum: the method is univariate; got " +
                              std::to_string(series.channels()) +
                              " channels (select one channel first)");
    }
    if (config.window < 2) throw ValidationError("cusum: window must be >= 2");
    if (series.samples() < 2 * config.window) {
        throw ValidationError("cusum: series shorter than two windows");
    }
    Vector x = series.data.row(0);
    double mean0 = x.head(config.window).mean();
    double theta0 = (x.head(config.window).array() - mean0).square().sum() / config.window;
    theta0 = std::max(theta0, 1e-300);
    double step = 0.0;
    std::vector<double> grid = cusum_grid(config, theta0, &step);
    CusumRun run = cusum_run(x, config.window, config.threshold, grid, step);

    const Index n = epochs.n_epochs();
    ChangePointReport report;
    report.detector = DetectorKind::cusum;
    report.tau = config.threshold;
    report.flags.assign(n - 1, false);
    report.scores.assign(n - 1, -std::numeric_limits<double>::infinity());
    // Boundary b sits at sample boundaries[b]; an alarm at time t belongs to
    // the nearest boundary at or after t, so boundary b owns the evaluation
    // times in (boundary_{b-1}, boundary_b].
    auto owner = [&](Index t) -> Index {
        auto it = std::lower_bound(epochs.boundaries.begin(), epochs.boundaries.end(), t);
        return static_cast<Index>(it - epochs.boundaries.begin());
    };
    for (std::size_t i = 0; i < run.stat.size(); ++i) {
        Index b = owner(run.stat_times[i]);
        if (b < n - 1) report.scores[b] = std::max(report.scores[b], run.stat[i]);
    }
    for (Index alarm : run.alarms) {
        Index b = owner(alarm);
        if (b < n - 1) report.flags[b] = true;
    }
    return report;
}

// ---------------------------------------------------- Kohlmorgen/Lemm ----

double kohlmorgen_lemm_distance(const Matrix& epoch_a, const Matrix& epoch_b, double sigma) {
    if (epoch_a.rows() != epoch_b.rows()) {
        throw ValidationError("kohlmorgen_lemm_distance: dimension mismatch");
    }
    if (epoch_a.cols() != epoch_b.cols()) {
        throw ValidationError("kohlmorgen_lemm_distance: window lengths differ");
    }
    if (!(sigma > 0.0)) throw ValidationError("kohlmorgen_lemm_distance: sigma must be positive");
    const Index w = epoch_a.cols();
    const double d = static_cast<double>(epoch_a.rows());
    const double inv_four_sigma_sq = 1.0 / (4.0 * sigma * sigma);
    auto kernel_sum = [&](const Matrix& ya, const Matrix& yb) {
        double s = 0.0;
        for (Index i = 0; i < ya.cols(); ++i) {
            for (Index j = 0; j < yb.cols(); ++j) {
                s += std::exp(-(ya.col(i) - yb.col(j)).squaredNorm() * inv_four_sigma_sq);
            }
        }
        return s;
    };
    const double norm =
        std::pow(4.0 * std::numbers::pi * sigma * sigma, -0.5 * d) / static_cast<double>(w * w);
    return norm * (kernel_sum(epoch_a, epoch_a) - 2.0 * kernel_sum(epoch_a, epoch_b) +
                   kernel_sum(epoch_b, epoch_b));
}

double kde_sigma_rule(const TimeSeries& series, Index max_points) {
    const Index total = series.samples();
    const Index d = series.channels();
    if (total <= d + 1) throw ValidationError("kde_sigma_rule: series too short");
    std::vector<Index> picks;
    if (total <= max_points) {
        for (Index t = 0; t < total; ++t) picks.push_back(t);
    } else {
        for (Index j = 0; j < max_points; ++j) picks.push_back(j * total / max_points);
    }
    const Index m = static_cast<Index>(picks.size());
    const Index k = std::min<Index>(d, m - 1);
    double acc = 0.0;
    std::vector<double> dists(m);
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            dists[j] = (series.data.col(picks[i]) - series.data.col(picks[j])).norm();
        }
        dists[i] = std::numeric_limits<double>::infinity(); // exclude self
        std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
        double mean_k = 0.0;
        for (Index j = 0; j < k; ++j) mean_k += dists[j];
        acc += mean_k / static_cast<double>(k);
    }
    double sigma = acc / static_cast<double>(m);
    if (!(sigma > 0.0)) throw NumericalError("kde_sigma_rule: degenerate data, sigma is zero");
    return sigma;
}

std::vector<int> kohlmorgen_lemm_states(const Matrix& dist, double cost,
                                        std::optional<int> fixed_n_changepoints) {
    const Index n = dist.rows();
    if (!fixed_n_changepoints) {
        // V_i(s) = d(s, i) + min(V_{i-1}(s), min_s' V_{i-1}(s') + C)
        Matrix v(n, n);
        Matrix switched(n, n); // 1.0 where the optimal predecessor is a switch
        v.col(0) = dist.col(0);
        switched.col(0).setZero();
        for (Index i = 1; i < n; ++i) {
            Index argmin = 0;
            for (Index s = 1; s < n; ++s)
                if (v(s, i - 1) < v(argmin, i - 1)) argmin = s;
            double best_prev = v(argmin, i - 1) + cost;
            for (Index s = 0; s < n; ++s) {
                // staying wins ties, so boundaries are only reported when
                // switching is strictly better
                if (v(s, i - 1) <= best_prev) {
                    v(s, i) = dist(s, i) + v(s, i - 1);
                    switched(s, i) = 0.0;
                } else {
                    v(s, i) = dist(s, i) + best_prev;
                    switched(s, i) = 1.0 + static_cast<double>(argmin);
                }
            }
        }
        Index s = 0;
        for (Index cand = 1; cand < n; ++cand)
            if (v(cand, n - 1) < v(s, n - 1)) s = cand;
        std::vector<int> states(n);
        for (Index i = n - 1;; --i) {
            states[i] = static_cast<int>(s);
            if (i == 0) break;
            if (switched(s, i) > 0.0) s = static_cast<Index>(switched(s, i) - 1.0);
        }
        return states;
    }

    const int changes = *fixed_n_changepoints;
    if (changes < 0 || changes > n - 1) {
        throw ValidationError("kohlmorgen_lemm: fixed change count out of range");
    }
    // Exact-N variant: V_i(s, c) with exactly c switches so far; transition
    // cost drops out of the argmin.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<Matrix> v(changes + 1, Matrix::Constant(n, n, inf));
    std::vector<Eigen::MatrixXi> from(changes + 1, Eigen::MatrixXi::Constant(n, n, -1));
    v[0].col(0) = dist.col(0);
    for (Index i = 1; i < n; ++i) {
        for (int c = 0; c <= changes; ++c) {
            // best and runner-up of v[c-1](., i-1) for the s' != s constraint
            Index arg1 = -1, arg2 = -1;
            if (c > 0) {
                for (Index s = 0; s < n; ++s) {
                    if (v[c - 1](s, i - 1) == inf) continue;
                    if (arg1 < 0 || v[c - 1](s, i - 1) < v[c - 1](arg1, i - 1)) {
                        arg2 = arg1;
                        arg1 = s;
                    } else if (arg2 < 0 || v[c - 1](s, i - 1) < v[c - 1](arg2, i - 1)) {
                        arg2 = s;
                    }
                }
            }
            for (Index s = 0; s < n; ++s) {
                double stay = v[c](s, i - 1);
                double sw = inf;
                Index sw_from = -1;
                if (c > 0 && arg1 >= 0) {
                    sw_from = (arg1 != s) ? arg1 : arg2;
                    if (sw_from >= 0) sw = v[c - 1](sw_from, i - 1);
                }
                if (stay <= sw) {
                    if (stay == inf) continue;
                    v[c](s, i) = dist(s, i) + stay;
                    from[c](s, i) = static_cast<int>(s);
                } else {
                    v[c](s, i) = dist(s, i) + sw;
                    from[c](s, i) = static_cast<int>(sw_from) + static_cast<int>(n); // switch marker
                }
            }
        }
    }
    Index s = -1;
    for (Index cand = 0; cand < n; ++cand) {
        if (v[changes](cand, n - 1) == inf) continue;
        if (s < 0 || v[changes](cand, n - 1) < v[changes](s, n - 1)) s = cand;
    }
    if (s < 0) throw NumericalError("kohlmorgen_lemm: no sequence with requested change count");
    std::vector<int> states(n);
    int c = changes;
    for (Index i = n - 1;; --i) {
        states[i] = static_cast<int>(s);
        if (i == 0) break;
        int f = from[c](s, i);
        if (f >= static_cast<int>(n)) {
            s = f - static_cast<int>(n);
            --c;
        } else {
            s = f;
        }
    }
    return states;
}

namespace {

std::vector<bool> boundaries_from_states(const std::vector<int>& states) {
    std::vector<bool> flags(states.size() - 1);
    for (std::size_t i = 0; i + 1 < states.size(); ++i) flags[i] = states[i + 1] != states[i];
    return flags;
}

} // namespace

ChangePointReport kohlmorgen_lemm_detect(const TimeSeries& series, const Epoching& epochs,
                                         const KohlLemmConfig& config, double* sigma_used) {
    const Index n = epochs.n_epochs();
    const Index w = std::min<Index>(config.window, epochs.epoch_len(0));
    for (Index i = 0; i < n; ++i) {
        if (epochs.epoch_len(i) < w) {
            throw ValidationError("kohlmorgen_lemm: epoch " + std::to_string(i) +
                                  " shorter than the density window");
        }
    }
    std::vector<Matrix> windows(n);
    Matrix stacked(series.channels(), n * w);
    for (Index i = 0; i < n; ++i) {
        windows[i] = series.data.middleCols(epochs.epoch_start(i), w);
        stacked.middleCols(i * w, w) = windows[i];
    }
    double sigma = config.sigma;
    if (!(sigma > 0.0)) {
        // Bandwidth at the density-window resolution: the rule is evaluated
        // on a subsample of as many points as one window holds.
        sigma = kde_sigma_rule(TimeSeries(stacked), std::max<Index>(w, series.channels() + 2));
    }
    if (sigma_used) *sigma_used = sigma;

    // Pairwise density distances; self kernel sums are shared across pairs.
    const double d = static_cast<double>(series.channels());
    const double inv_four_sigma_sq = 1.0 / (4.0 * sigma * sigma);
    const double norm =
        std::pow(4.0 * std::numbers::pi * sigma * sigma, -0.5 * d) / static_cast<double>(w * w);
    auto kernel_sum = [&](const Matrix& ya, const Matrix& yb) {
        double s = 0.0;
        for (Index i = 0; i < ya.cols(); ++i)
            for (Index j = 0; j < yb.cols(); ++j)
                s += std::exp(-(ya.col(i) - yb.col(j)).squaredNorm() * inv_four_sigma_sq);
        return s;
    };
    Vector self(n);
    for (Index i = 0; i < n; ++i) self(i) = kernel_sum(windows[i], windows[i]);
    Matrix dist = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            double v = norm * (self(i) - 2.0 * kernel_sum(windows[i], windows[j]) + self(j));
            dist(i, j) = dist(j, i) = std::max(0.0, v);
        }
    }

    ChangePointReport report;
    report.detector = DetectorKind::kohlmorgen_lemm;
    report.tau = config.cost;
    report.flags = boundaries_from_states(
        kohlmorgen_lemm_states(dist, config.cost, config.fixed_n_changepoints));

    // Boundary score: the largest transition cost at which the boundary is
    // still reported, over a log-spaced grid that provably spans from
    // "everything splits" to "a single state wins".
    double single_state_cost = std::numeric_limits<double>::infinity();
    Vector row_min = dist.rowwise().sum();
    for (Index s = 0; s < n; ++s) single_state_cost = std::min(single_state_cost, row_min(s) / 1.0);
    double floor_cost = 0.0;
    for (Index i = 0; i < n; ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (Index s = 0; s < n; ++s) m = std::min(m, dist(s, i));
        floor_cost += m;
    }
    double c_hi = std::max(1e-12, (single_state_cost - floor_cost) * 1.000001);
    double c_lo = std::max(1e-9 * c_hi, 1e-15);
    std::set<double> grid;
    for (int g = 0; g < config.score_grid; ++g) {
        double t = config.score_grid == 1
                       ? 0.0
                       : static_cast<double>(g) / (config.score_grid - 1);
        grid.insert(c_lo * std::pow(c_hi / c_lo, t));
    }
    if (config.cost > 0.0) grid.insert(config.cost);
    report.scores.assign(n - 1, 0.0);
    for (double c : grid) {
        std::vector<bool> flags = boundaries_from_states(kohlmorgen_lemm_states(dist, c));
        for (Index b = 0; b < n - 1; ++b) {
            if (flags[b]) report.scores[b] = std::max(report.scores[b], c);
        }
    }
    return report;
}

} // namespace ssacpd
