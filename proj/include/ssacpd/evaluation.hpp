#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssacpd/detectors.hpp"
#include "ssacpd/ssa.hpp"
#include "ssacpd/synthgen.hpp"

namespace ssacpd {

struct Confusion {
    int tp = 0, fp = 0, fn = 0, tn = 0;
    double tpr() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn); }
    double fpr() const { return fp + tn == 0 ? 0.0 : static_cast<double>(fp) / (fp + tn); }
};

// Boundary-aligned confusion counts. With tolerance > 0, flagged and true
// boundaries are matched one-to-one greedily within +-tolerance positions.
Confusion confusion_at_boundaries(const std::vector<bool>& flags, const std::vector<bool>& truth,
                                  int tolerance = 0);

struct RocCurve {
    std::vector<std::pair<double, double>> points; // (fpr, tpr) sorted by fpr
    std::vector<double> tau_values;                // threshold per point
    double auc = 0;
};

// ROC by thresholding boundary scores at every distinct score value;
// endpoints (0,0) and (1,1) are always present.
RocCurve roc_from_scores(const std::vector<double>& scores, const std::vector<bool>& truth);

// ROC from explicitly swept operating points (tau, fpr, tpr), e.g. a CUSUM
// threshold sweep.
RocCurve roc_from_points(std::vector<std::tuple<double, double, double>> tau_fpr_tpr);

enum class Condition { baseline, random_projection, ssa };
std::string condition_name(Condition c);
Condition condition_from_name(const std::string& name);

enum class Scheme { vary_dn_fixed_D, vary_ds_fixed_dn, vary_p_fixed_dims };
std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

struct ExperimentPlan {
    Scheme scheme = Scheme::vary_ds_fixed_dn;
    std::vector<double> grid; // d_n, d_s, or p values depending on the scheme
    SynthConfig base;         // dimensions overridden per grid value
    int n_realizations = 20;
    DetectorKind detector = DetectorKind::slcd;
    std::vector<Condition> conditions = {Condition::baseline, Condition::random_projection,
                                         Condition::ssa};
    SsaConfig ssa;
    SlcdConfig slcd;
    CusumConfig cusum;
    KohlLemmConfig kl;
    int cusum_threshold_sweep = 32;
    int cusum_eval_tolerance = 1; // epochs; alarms trail the change
    std::uint64_t master_seed = 0;
    int jobs = 1;
};

struct ExperimentCell {
    double grid_value = 0;
    Condition condition = Condition::baseline;
    std::vector<double> auc_samples;
    double q25 = 0, median = 0, q75 = 0;
    int failures = 0;
};

struct ExperimentResult {
    std::vector<ExperimentCell> cells;
    const ExperimentCell& cell(double grid_value, Condition condition) const;
};

ExperimentResult run_experiment(const ExperimentPlan& plan);

// AUC of one detector run on one input under the plan's settings (the CUSUM
// path sweeps thresholds, the others threshold boundary scores).
double detector_auc(const ExperimentPlan& plan, const TimeSeries& input, const Epoching& epochs,
                    const std::vector<bool>& truth);

double percentile(std::vector<double> values, double q); // linear interpolation

} // namespace ssacpd
