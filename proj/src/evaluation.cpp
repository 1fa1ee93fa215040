#include "ssacpd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ssacpd/seeding.hpp"

namespace ssacpd {

Confusion confusion_at_boundaries(const std::vector<bool>& flags, const std::vector<bool>& truth,
                                  int tolerance) {
    if (flags.size() != truth.size()) {
        throw ValidationError("confusion_at_boundaries: boundary counts differ");
    }
    const int n = static_cast<int>(flags.size());
    Confusion c;
    if (tolerance == 0) {
        for (int i = 0; i < n; ++i) {
            if (truth[i] && flags[i]) ++c.tp;
            else if (!truth[i] && flags[i]) ++c.fp;
            else if (truth[i] && !flags[i]) ++c.fn;
            else ++c.tn;
        }
        return c;
    }
    // Greedy one-to-one matching, left to right.
    std::vector<bool> used(flags.size(), false);
    for (int i = 0; i < n; ++i) {
        if (!truth[i]) continue;
        int match = -1;
        for (int j = std::max(0, i - tolerance); j <= std::min(n - 1, i + tolerance); ++j) {
            if (flags[j] && !used[j] && (match < 0 || std::abs(j - i) < std::abs(match - i))) {
                match = j;
            }
        }
        if (match >= 0) {
            used[match] = true;
            ++c.tp;
        } else {
            ++c.fn;
        }
    }
    for (int j = 0; j < n; ++j) {
        if (flags[j] && !used[j]) ++c.fp;
    }
    c.tn = n - c.tp - c.fp - c.fn;
    return c;
}

RocCurve roc_from_scores(const std::vector<double>& scores, const std::vector<bool>& truth) {
    if (scores.size() != truth.size()) {
        throw ValidationError("roc_from_scores: lengths differ");
    }
    int positives = 0;
    for (bool t : truth) positives += t ? 1 : 0;
    const int negatives = static_cast<int>(truth.size()) - positives;
    if (positives == 0 || negatives == 0) {
        throw ValidationError("roc_from_scores: degenerate truth (needs both classes)");
    }
    std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
    RocCurve roc;
    roc.points.emplace_back(0.0, 0.0);
    roc.tau_values.push_back(std::numeric_limits<double>::infinity());
    for (double th : thresholds) {
        int tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= th) (truth[i] ? tp : fp)++;
        }
        roc.points.emplace_back(static_cast<double>(fp) / negatives,
                                static_cast<double>(tp) / positives);
        roc.tau_values.push_back(th);
    }
    if (roc.points.back() != std::make_pair(1.0, 1.0)) {
        roc.points.emplace_back(1.0, 1.0);
        roc.tau_values.push_back(-std::numeric_limits<double>::infinity());
    }
    std::vector<std::size_t> order(roc.points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return roc.points[a] < roc.points[b];
    });
    std::vector<std::pair<double, double>> pts;
    std::vector<double> taus;
    for (std::size_t idx : order) {
        if (!pts.empty() && pts.back() == roc.points[idx]) continue;
        pts.push_back(roc.points[idx]);
        taus.push_back(roc.tau_values[idx]);
    }
    roc.points = std::move(pts);
    roc.tau_values = std::move(taus);
    double auc = 0.0;
    for (std::size_t i = 0; i + 1 < roc.points.size(); ++i) {
        auc += (roc.points[i + 1].first - roc.points[i].first) *
               0.5 * (roc.points[i + 1].second + roc.points[i].second);
    }
    roc.auc = auc;
    return roc;
}

RocCurve roc_from_points(std::vector<std::tuple<double, double, double>> tau_fpr_tpr) {
    RocCurve roc;
    tau_fpr_tpr.emplace_back(std::numeric_limits<double>::infinity(), 0.0, 0.0);
    tau_fpr_tpr.emplace_back(-std::numeric_limits<double>::infinity(), 1.0, 1.0);
    std::sort(tau_fpr_tpr.begin(), tau_fpr_tpr.end(), [](const auto& a, const auto& b) {
        return std::make_pair(std::get<1>(a), std::get<2>(a)) <
               std::make_pair(std::get<1>(b), std::get<2>(b));
    });
    for (const auto& [tau, fpr, tpr] : tau_fpr_tpr) {
        if (!roc.points.empty() && roc.points.back() == std::make_pair(fpr, tpr)) continue;
        roc.points.emplace_back(fpr, tpr);
        roc.tau_values.push_back(tau);
    }
    double auc = 0.0;
    for (std::size_t i = 0; i + 1 < roc.points.size(); ++i) {
        auc += (roc.points[i + 1].first - roc.points[i].first) *
               0.5 * (roc.points[i + 1].second + roc.points[i].second);
    }
    roc.auc = auc;
    return roc;
}

std::string condition_name(Condition c) {
    switch (c) {
        case Condition::baseline: return "baseline";
        case Condition::random_projection: return "random_projection";
        case Condition::ssa: return "ssa";
    }
    return "unknown";
}

Condition condition_from_name(const std::string& name) {
    if (name == "baseline") return Condition::baseline;
    if (name == "random_projection") return Condition::random_projection;
    if (name == "ssa") return Condition::ssa;
    throw ValidationError("unknown condition '" + name + "'");
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::vary_dn_fixed_D: return "vary_dn_fixed_D";
        case Scheme::vary_ds_fixed_dn: return "vary_ds_fixed_dn";
        case Scheme::vary_p_fixed_dims: return "vary_p_fixed_dims";
    }
    return "unknown";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "vary_dn_fixed_D") return Scheme::vary_dn_fixed_D;
    if (name == "vary_ds_fixed_dn") return Scheme::vary_ds_fixed_dn;
    if (name == "vary_p_fixed_dims") return Scheme::vary_p_fixed_dims;
    throw ValidationError("unknown scheme '" + name + "'");
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("percentile: empty sample");
    std::sort(values.begin(), values.end());
    double pos = q * static_cast<double>(values.size() - 1);
    std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

const ExperimentCell& ExperimentResult::cell(double grid_value, Condition condition) const {
    for (const auto& c : cells) {
        if (c.condition == condition && c.grid_value == grid_value) return c;
    }
    throw ValidationError("ExperimentResult: no such cell");
}

namespace {

SynthConfig config_for_grid_value(const ExperimentPlan& plan, double g) {
    SynthConfig cfg = plan.base;
    switch (plan.scheme) {
        case Scheme::vary_dn_fixed_D:
            cfg.d_n = static_cast<int>(g);
            cfg.d_s = cfg.D - cfg.d_n;
            break;
        case Scheme::vary_ds_fixed_dn:
            cfg.d_s = static_cast<int>(g);
            cfg.D = cfg.d_s + cfg.d_n;
            break;
        case Scheme::vary_p_fixed_dims:
            cfg.p = g;
            break;
    }
    return cfg;
}

double cusum_sweep_auc(const ExperimentPlan& plan, const TimeSeries& input,
                       const Epoching& epochs, const std::vector<bool>& truth) {
    // Reference pass without alarms yields the score range; thresholds are
    // then swept with full, path-dependent runs.
    CusumConfig ref = plan.cusum;
    ref.threshold = std::numeric_limits<double>::infinity();
    ChangePointReport base = cusum_detect(input, epochs, ref);
    std::vector<double> finite;
    for (double s : base.scores) {
        if (std::isfinite(s)) finite.push_back(s);
    }
    if (finite.empty()) return 0.5; // no evaluations: uninformative detector
    std::sort(finite.begin(), finite.end());
    finite.erase(std::unique(finite.begin(), finite.end()), finite.end());
    std::vector<double> thresholds;
    const int sweep = std::max(2, plan.cusum_threshold_sweep);
    if (static_cast<int>(finite.size()) <= sweep) {
        thresholds = finite;
    } else {
        for (int i = 0; i < sweep; ++i) {
            std::size_t idx = static_cast<std::size_t>(
                std::llround(static_cast<double>(i) * (finite.size() - 1) / (sweep - 1)));
            thresholds.push_back(finite[idx]);
        }
        thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    }
    std::vector<std::tuple<double, double, double>> points;
    for (double h : thresholds) {
        CusumConfig cfg = plan.cusum;
        cfg.threshold = h;
        ChangePointReport rep = cusum_detect(input, epochs, cfg);
        Confusion conf = confusion_at_boundaries(rep.flags, truth, plan.cusum_eval_tolerance);
        points.emplace_back(h, conf.fpr(), conf.tpr());
    }
    return roc_from_points(std::move(points)).auc;
}

} // namespace

double detector_auc(const ExperimentPlan& plan, const TimeSeries& input, const Epoching& epochs,
                    const std::vector<bool>& truth) {
    switch (plan.detector) {
        case DetectorKind::slcd: {
            ChangePointReport rep = slcd_detect(input, epochs, plan.slcd.k_clusters);
            return roc_from_scores(rep.scores, truth).auc;
        }
        case DetectorKind::kohlmorgen_lemm: {
            ChangePointReport rep = kohlmorgen_lemm_detect(input, epochs, plan.kl);
            return roc_from_scores(rep.scores, truth).auc;
        }
        case DetectorKind::cusum:
            return cusum_sweep_auc(plan, input, epochs, truth);
    }
    throw ValidationError("detector_auc: unknown detector");
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
    if (plan.grid.empty()) throw ValidationError("run_experiment: empty grid");
    if (plan.n_realizations < 1) throw ValidationError("run_experiment: need realizations");
    ExperimentResult result;
    for (std::size_t gi = 0; gi < plan.grid.size(); ++gi) {
        SynthConfig cfg = config_for_grid_value(plan, plan.grid[gi]);
        cfg.validate();
        std::vector<std::vector<double>> samples(plan.conditions.size());
        int failures = 0;
        for (int r = 0; r < plan.n_realizations; ++r) {
            const std::uint64_t idx =
                static_cast<std::uint64_t>(gi) * 100000ull + static_cast<std::uint64_t>(r);
            SynthConfig gen_cfg = cfg;
            gen_cfg.seed = derive_seed(plan.master_seed, "realization", idx);
            SynthDataset ds = generate(gen_cfg);
            std::vector<bool> truth = ds.boundary_truth();
            int positives = 0;
            for (bool t : truth) positives += t ? 1 : 0;
            if (positives == 0 || positives == static_cast<int>(truth.size())) {
                ++failures; // undefined ROC for this draw
                continue;
            }
            Epoching epochs = ds.epochs();
            std::vector<double> aucs(plan.conditions.size());
            try {
                for (std::size_t ci = 0; ci < plan.conditions.size(); ++ci) {
                    Condition cond = plan.conditions[ci];
                    if (cond == Condition::baseline && plan.detector == DetectorKind::cusum) {
                        // Univariate detector: best single channel of this draw.
                        double best = -std::numeric_limits<double>::infinity();
                        for (Index ch = 0; ch < ds.series.channels(); ++ch) {
                            TimeSeries one(ds.series.data.row(ch));
                            best = std::max(best, detector_auc(plan, one, epochs, truth));
                        }
                        aucs[ci] = best;
                        continue;
                    }
                    TimeSeries input;
                    switch (cond) {
                        case Condition::baseline:
                            input = ds.series;
                            break;
                        case Condition::random_projection: {
                            auto rng = make_rng(plan.master_seed, "random_projection", idx);
                            Matrix proj = random_projection(gen_cfg.D, gen_cfg.d_n, rng);
                            input = TimeSeries(proj * ds.series.data);
                            break;
                        }
                        case Condition::ssa: {
                            SsaConfig scfg = plan.ssa;
                            scfg.dim = gen_cfg.d_n;
                            scfg.seed = derive_seed(plan.master_seed, "ssa_fit", idx);
                            EpochStats stats = epoch_stats(ds.series, epochs);
                            WhiteningTransform w = fit_whitening(stats);
                            SsaFit fit = fit_n_projection(w.apply(stats), scfg);
                            input = TimeSeries(fit.projection * w.matrix *
                                               (ds.series.data.colwise() - w.shift));
                            break;
                        }
                    }
                    aucs[ci] = detector_auc(plan, input, epochs, truth);
                }
            } catch (const std::exception&) {
                ++failures;
                continue;
            }
            for (std::size_t ci = 0; ci < plan.conditions.size(); ++ci) {
                samples[ci].push_back(aucs[ci]);
            }
        }
        if (failures * 10 > plan.n_realizations) {
            throw NumericalError("run_experiment: more than 10% of realizations failed at grid " +
                                 std::to_string(plan.grid[gi]));
        }
        for (std::size_t ci = 0; ci < plan.conditions.size(); ++ci) {
            ExperimentCell cell;
            cell.grid_value = plan.grid[gi];
            cell.condition = plan.conditions[ci];
            cell.auc_samples = samples[ci];
            cell.failures = failures;
            cell.q25 = percentile(cell.auc_samples, 0.25);
            cell.median = percentile(cell.auc_samples, 0.5);
            cell.q75 = percentile(cell.auc_samples, 0.75);
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

} // namespace ssacpd
