#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ssacpd/io.hpp"
#include "ssacpd/pipeline.hpp"
#include "ssacpd/plot.hpp"
#include "ssacpd/seeding.hpp"

namespace fs = std::filesystem;
using namespace ssacpd;

namespace {

struct SsaFlags {
    int restarts = 5;
    int max_iters = 500;
    double grad_tol = 1e-6;
    double step_init = 1.0;
    std::uint64_t seed = 0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--restarts", restarts, "optimizer restarts");
        cmd->add_option("--max-iters", max_iters, "iteration cap per restart");
        cmd->add_option("--grad-tol", grad_tol, "gradient stopping tolerance");
        cmd->add_option("--step-init", step_init, "initial line-search step");
        cmd->add_option("--seed", seed, "random seed");
    }
    SsaConfig config() const {
        SsaConfig cfg;
        cfg.n_restarts = restarts;
        cfg.max_iters = max_iters;
        cfg.grad_tol = grad_tol;
        cfg.step_init = step_init;
        cfg.seed = seed;
        return cfg;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"Stationary-subspace feature extraction for change-point detection"};
    app.require_subcommand(1);

    // ---- generate ----
    auto* gen = app.add_subcommand("generate", "synthesize a benchmark dataset");
    std::string gen_config, gen_out = ".";
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--config", gen_config, "SynthConfig JSON path")->required();
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--seed", gen_seed, "override the config seed");
    gen->callback([&] {
        json j = read_json(gen_config);
        if (gen_seed) j["seed"] = *gen_seed;
        SynthConfig cfg = synth_config_from_json(j);
        SynthDataset ds = generate(cfg);
        fs::create_directories(gen_out);
        write_csv_timeseries(fs::path(gen_out) / "series.csv", ds.series);
        write_json(fs::path(gen_out) / "dataset.json", sidecar_to_json(ds, cfg));
        std::cerr << "wrote " << (fs::path(gen_out) / "series.csv").string() << " ("
                  << ds.series.channels() << " channels x " << ds.series.samples()
                  << " samples)\n";
    });

    // ---- fit-ssa ----
    auto* fit = app.add_subcommand("fit-ssa", "fit the stationary/non-stationary projections");
    std::string fit_data, fit_out = "model.json", fit_sources_out, fit_emit;
    int fit_epochs = 30, fit_ds = 1;
    SsaFlags fit_flags;
    fit->add_option("--data", fit_data, "input CSV")->required();
    fit->add_option("--epochs", fit_epochs, "number of epochs");
    fit->add_option("--d-s", fit_ds, "stationary dimension")->required();
    fit->add_option("--out", fit_out, "model JSON path");
    fit->add_option("--emit-sources", fit_emit, "also write estimated sources: 's' or 'n'")
        ->check(CLI::IsMember({"s", "n"}));
    fit->add_option("--sources-out", fit_sources_out, "CSV path for --emit-sources");
    fit_flags.add_to(fit);
    fit->callback([&] {
        TimeSeries series = read_csv_timeseries(fit_data);
        Epoching epochs = make_epochs(series, fit_epochs);
        DemixingModel model = fit_ssa(series, epochs, fit_ds, fit_flags.config());
        write_json(fit_out, to_json(model));
        std::cerr << "objective_s=" << format_double(model.objective_s)
                  << " objective_n=" << format_double(model.objective_n) << "\n";
        if (!fit_emit.empty()) {
            if (fit_sources_out.empty()) {
                throw ValidationError("--emit-sources requires --sources-out");
            }
            SourceKind kind =
                fit_emit == "s" ? SourceKind::stationary : SourceKind::nonstationary;
            write_csv_timeseries(fit_sources_out, extract_sources(series, model, kind));
        }
    });

    // ---- select-order ----
    auto* order = app.add_subcommand("select-order", "choose d_s by stationarity testing");
    std::string order_data, order_out = "selection.json", order_table;
    int order_epochs = 30;
    double order_alpha = 0.01;
    SsaFlags order_flags;
    order->add_option("--data", order_data, "input CSV")->required();
    order->add_option("--epochs", order_epochs, "number of epochs");
    order->add_option("--alpha", order_alpha, "significance level");
    order->add_option("--out", order_out, "selection JSON path");
    order->add_option("--table", order_table, "per-candidate CSV table path");
    order_flags.add_to(order);
    order->callback([&] {
        TimeSeries series = read_csv_timeseries(order_data);
        EpochStats stats = epoch_stats(series, make_epochs(series, order_epochs));
        EpochStats white = fit_whitening(stats).apply(stats);
        OrderSelection sel = select_order(white, order_flags.config(), order_alpha);
        write_json(order_out, to_json(sel));
        if (!order_table.empty()) write_text_atomic(order_table, order_selection_csv(sel));
        std::cerr << "chosen_d_s=" << sel.chosen_d_s << "\n";
    });

    // ---- bnise ----
    auto* bn = app.add_subcommand("bnise", "baseline-normalized integral stationary error");
    std::string bn_data, bn_out = "bnise.json", bn_table;
    int bn_epochs = 10, bn_up_to = 0, bn_perms = 20;
    SsaFlags bn_flags;
    bn->add_option("--data", bn_data, "input CSV")->required();
    bn->add_option("--epochs", bn_epochs, "epochs per half");
    bn->add_option("--up-to-d", bn_up_to, "largest candidate dimension (default D)");
    bn->add_option("--permutations", bn_perms, "permutation draws")->check(CLI::PositiveNumber);
    bn->add_option("--out", bn_out, "report JSON path");
    bn->add_option("--table", bn_table, "CSV table path");
    bn_flags.add_to(bn);
    bn->callback([&] {
        TimeSeries series = read_csv_timeseries(bn_data);
        if (bn_perms < 2) throw ValidationError("bnise: need at least 2 permutations");
        HoldoutConfig cfg;
        cfg.n_epochs = bn_epochs;
        cfg.n_permutations = bn_perms;
        cfg.seed = bn_flags.seed;
        cfg.ssa = bn_flags.config();
        int up_to = bn_up_to > 0 ? bn_up_to : static_cast<int>(series.channels());
        BniseReport report = bnise(series, up_to, cfg);
        write_json(bn_out, to_json(report));
        if (!bn_table.empty()) write_text_atomic(bn_table, bnise_csv(report));
    });

    // ---- detect ----
    auto* det = app.add_subcommand("detect", "run a change-point detector");
    std::string det_data, det_name, det_out = "report.json", det_csv, det_sigma = "auto";
    int det_epochs = 200, det_k = 5, det_window = 0, det_grid_points = 25;
    double det_threshold = 10.0, det_cost = 1.0;
    std::optional<double> det_grid_lo, det_grid_hi;
    std::optional<int> det_channel, det_nchanges;
    det->add_option("--data", det_data, "input CSV")->required();
    det->add_option("--detector", det_name, "slcd | cusum | kl")->required();
    det->add_option("--epochs", det_epochs, "number of evaluation epochs");
    det->add_option("--k", det_k, "slcd: cluster count");
    det->add_option("--window", det_window, "cusum/kl: window length");
    det->add_option("--threshold", det_threshold, "cusum: alarm level h");
    det->add_option("--grid-lo", det_grid_lo, "cusum: smallest candidate variance");
    det->add_option("--grid-hi", det_grid_hi, "cusum: largest candidate variance");
    det->add_option("--grid-points", det_grid_points, "cusum: variance grid size");
    det->add_option("--sigma", det_sigma, "kl: kernel width or 'auto'");
    det->add_option("--cost", det_cost, "kl: transition cost C");
    det->add_option("--n-changepoints", det_nchanges, "kl: exact change count mode");
    det->add_option("--channel", det_channel, "cusum: channel index for multichannel input");
    det->add_option("--out", det_out, "report JSON path");
    det->add_option("--csv", det_csv, "report CSV path");
    det->callback([&] {
        TimeSeries series = read_csv_timeseries(det_data);
        Epoching epochs = make_epochs(series, det_epochs);
        ChangePointReport report;
        DetectorKind kind = detector_from_name(det_name);
        switch (kind) {
            case DetectorKind::slcd:
                report = slcd_detect(series, epochs, det_k);
                break;
            case DetectorKind::cusum: {
                if (series.channels() != 1 && !det_channel) {
                    throw ValidationError(
                        "cusum is a univariate method: input has " +
                        std::to_string(series.channels()) +
                        " channels, pass --channel to select one");
                }
                TimeSeries input = series;
                if (det_channel) {
                    if (*det_channel < 0 || *det_channel >= series.channels()) {
                        throw ValidationError("--channel out of range");
                    }
                    input = TimeSeries(series.data.row(*det_channel));
                }
                CusumConfig cfg;
                cfg.window = det_window > 0 ? det_window : 100;
                cfg.threshold = det_threshold;
                cfg.grid_points = det_grid_points;
                if (det_grid_lo.has_value() != det_grid_hi.has_value()) {
                    throw ValidationError("--grid-lo and --grid-hi must be given together");
                }
                if (det_grid_lo) cfg.grid_range = std::make_pair(*det_grid_lo, *det_grid_hi);
                report = cusum_detect(input, epochs, cfg);
                break;
            }
            case DetectorKind::kohlmorgen_lemm: {
                KohlLemmConfig cfg;
                cfg.window = det_window > 0 ? det_window : 50;
                cfg.cost = det_cost;
                cfg.fixed_n_changepoints = det_nchanges;
                if (det_sigma != "auto") cfg.sigma = std::stod(det_sigma);
                double sigma_used = 0.0;
                report = kohlmorgen_lemm_detect(series, epochs, cfg, &sigma_used);
                std::cerr << "sigma=" << format_double(sigma_used) << "\n";
                break;
            }
        }
        write_json(det_out, to_json(report));
        if (!det_csv.empty()) write_text_atomic(det_csv, report_csv(report));
    });

    // ---- evaluate ----
    auto* eval = app.add_subcommand("evaluate", "ROC/AUC of a report against ground truth");
    std::string eval_report, eval_truth, eval_out = "roc.json", eval_csv;
    int eval_tolerance = 0;
    eval->add_option("--report", eval_report, "ChangePointReport JSON")->required();
    eval->add_option("--truth", eval_truth, "dataset sidecar JSON with true_changepoints")
        ->required();
    eval->add_option("--tolerance", eval_tolerance, "boundary match tolerance in epochs");
    eval->add_option("--out", eval_out, "ROC JSON path");
    eval->add_option("--csv", eval_csv, "ROC CSV path");
    eval->callback([&] {
        ChangePointReport report = report_from_json(read_json(eval_report));
        json sidecar = read_json(eval_truth);
        std::vector<bool> truth(report.flags.size(), false);
        for (const auto& b : sidecar.at("true_changepoints")) {
            std::size_t idx = b.get<std::size_t>();
            if (idx >= truth.size()) {
                throw ValidationError("truth boundary index out of range for this report");
            }
            truth[idx] = true;
        }
        RocCurve roc = roc_from_scores(report.scores, truth);
        Confusion conf = confusion_at_boundaries(report.flags, truth, eval_tolerance);
        json out = to_json(roc);
        out["confusion"] = json{{"tp", conf.tp}, {"fp", conf.fp}, {"fn", conf.fn}, {"tn", conf.tn}};
        write_json(eval_out, out);
        if (!eval_csv.empty()) write_text_atomic(eval_csv, roc_csv(roc));
        std::cerr << "auc=" << format_double(roc.auc) << "\n";
    });

    // ---- experiment ----
    auto* exp = app.add_subcommand("experiment", "cached multi-stage experiment pipeline");
    std::string exp_config, exp_out = "experiment";
    std::optional<std::uint64_t> exp_seed;
    int exp_jobs = 1;
    exp->add_option("--config", exp_config, "pipeline config JSON")->required();
    exp->add_option("--out", exp_out, "output directory");
    exp->add_option("--seed", exp_seed, "override the config seed");
    exp->add_option("--jobs", exp_jobs, "parallel workers");
    exp->callback([&] {
        PipelineOutcome outcome = run_pipeline(read_json(exp_config), exp_out, exp_seed, exp_jobs);
        for (const auto& p : outcome.written) std::cerr << "wrote " << p.string() << "\n";
        if (outcome.stages_skipped > 0) {
            std::cerr << "reused " << outcome.stages_skipped << " cached stage outputs\n";
        }
    });

    // ---- plot ----
    auto* plot = app.add_subcommand("plot", "render a result JSON as SVG");
    std::string plot_input, plot_kind = "experiment", plot_out = "plot.svg", plot_title;
    plot->add_option("--input", plot_input, "result.json or roc.json")->required();
    plot->add_option("--kind", plot_kind, "experiment | roc")->check(CLI::IsMember({"experiment", "roc"}));
    plot->add_option("--title", plot_title, "plot title");
    plot->add_option("--out", plot_out, "SVG path");
    plot->callback([&] {
        json j = read_json(plot_input);
        if (plot_kind == "experiment") {
            ExperimentResult result = experiment_result_from_json(j);
            write_text_atomic(plot_out,
                              svg_experiment_plot(result, plot_title.empty() ? "AUC" : plot_title));
        } else {
            RocCurve roc = roc_from_json(j);
            write_text_atomic(plot_out, svg_roc_plot(roc, plot_title.empty() ? "ROC" : plot_title));
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
