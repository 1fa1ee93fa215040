#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ssacpd/detectors.hpp"
#include "ssacpd/evaluation.hpp"
#include "ssacpd/gaussian.hpp"
#include "ssacpd/model_order.hpp"
#include "ssacpd/ssa.hpp"
#include "ssacpd/synthgen.hpp"
#include "ssacpd/timeseries.hpp"

namespace py = pybind11;
using namespace ssacpd;

namespace {

SsaConfig make_ssa_config(int dim, int restarts, int max_iters, double grad_tol,
                          double step_init, std::uint64_t seed) {
    SsaConfig cfg;
    cfg.dim = dim;
    cfg.n_restarts = restarts;
    cfg.max_iters = max_iters;
    cfg.grad_tol = grad_tol;
    cfg.step_init = step_init;
    cfg.seed = seed;
    return cfg;
}

SynthConfig synth_config_from_kwargs(int D, int d_s, int d_n, int n_epochs, int epoch_len,
                                     double p, int n_states, double p_stay, std::uint64_t seed,
                                     const std::string& mixing, double condition) {
    SynthConfig cfg;
    cfg.D = D;
    cfg.d_s = d_s;
    cfg.d_n = d_n;
    cfg.n_epochs = n_epochs;
    cfg.epoch_len = epoch_len;
    cfg.p = p;
    cfg.n_states = n_states;
    cfg.p_stay = p_stay;
    cfg.seed = seed;
    cfg.condition = condition;
    if (mixing == "identity") cfg.mixing = MixingKind::identity;
    else if (mixing == "random_orthogonal") cfg.mixing = MixingKind::random_orthogonal;
    else if (mixing == "random_conditioned") cfg.mixing = MixingKind::random_conditioned;
    else throw ValidationError("unknown mixing '" + mixing + "'");
    return cfg;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stationary-subspace feature extraction for change-point detection";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<Epoching>(m, "Epoching")
        .def_property_readonly("n_epochs", &Epoching::n_epochs)
        .def_readonly("boundaries", &Epoching::boundaries)
        .def_readonly("covered", &Epoching::covered);

    py::class_<EpochStats>(m, "EpochStats")
        .def_property_readonly("n_epochs", &EpochStats::n_epochs)
        .def_property_readonly("dim", &EpochStats::dim)
        .def_readonly("means", &EpochStats::means)
        .def_readonly("covariances", &EpochStats::covariances)
        .def_readonly("counts", &EpochStats::counts);

    py::class_<WhiteningTransform>(m, "WhiteningTransform")
        .def_readonly("shift", &WhiteningTransform::shift)
        .def_readonly("matrix", &WhiteningTransform::matrix);

    py::class_<DemixingModel>(m, "DemixingModel")
        .def_readonly("b_s", &DemixingModel::b_s)
        .def_readonly("b_n", &DemixingModel::b_n)
        .def_readonly("objective_s", &DemixingModel::objective_s)
        .def_readonly("objective_n", &DemixingModel::objective_n)
        .def_property_readonly("whitening", [](const DemixingModel& mdl) { return mdl.whitening; })
        .def_property_readonly("d_s", &DemixingModel::d_s)
        .def_property_readonly("d_n", &DemixingModel::d_n);

    py::class_<StationarityTest>(m, "StationarityTest")
        .def_readonly("lambda_", &StationarityTest::lambda)
        .def_readonly("dof", &StationarityTest::dof)
        .def_readonly("p_value", &StationarityTest::p_value);

    py::class_<OrderSelection>(m, "OrderSelection")
        .def_readonly("alpha", &OrderSelection::alpha)
        .def_readonly("per_d", &OrderSelection::per_d)
        .def_readonly("chosen_d_s", &OrderSelection::chosen_d_s);

    py::class_<ChangePointReport>(m, "ChangePointReport")
        .def_property_readonly("detector",
                               [](const ChangePointReport& r) { return detector_name(r.detector); })
        .def_readonly("tau", &ChangePointReport::tau)
        .def_readonly("flags", &ChangePointReport::flags)
        .def_readonly("scores", &ChangePointReport::scores);

    py::class_<RocCurve>(m, "RocCurve")
        .def_readonly("points", &RocCurve::points)
        .def_readonly("tau_values", &RocCurve::tau_values)
        .def_readonly("auc", &RocCurve::auc);

    m.def("make_epochs",
          [](Index n_samples, int n_epochs) { return make_epochs(n_samples, n_epochs); },
          py::arg("n_samples"), py::arg("n_epochs"));

    m.def("epoch_stats",
          [](const Matrix& data, int n_epochs) {
              TimeSeries series(data);
              return epoch_stats(series, make_epochs(series, n_epochs));
          },
          py::arg("data"), py::arg("n_epochs"),
          "Per-epoch means and covariances of a channels x samples array");

    m.def("generate",
          [](int D, int d_s, int d_n, int n_epochs, int epoch_len, double p, int n_states,
             double p_stay, std::uint64_t seed, const std::string& mixing, double condition) {
              SynthConfig cfg = synth_config_from_kwargs(D, d_s, d_n, n_epochs, epoch_len, p,
                                                         n_states, p_stay, seed, mixing, condition);
              SynthDataset ds = generate(cfg);
              py::dict truth;
              truth["mixing"] = ds.true_mixing;
              truth["state_seq"] = ds.state_seq;
              truth["true_changepoints"] = ds.true_changepoints;
              truth["state_covs"] = ds.state_covs;
              truth["boundary_truth"] = ds.boundary_truth();
              return py::make_tuple(ds.series.data, truth);
          },
          py::arg("D"), py::arg("d_s"), py::arg("d_n"), py::arg("n_epochs"), py::arg("epoch_len"),
          py::arg("p"), py::arg("n_states") = 5, py::arg("p_stay") = 0.9, py::arg("seed") = 0,
          py::arg("mixing") = "random_orthogonal", py::arg("condition") = 10.0,
          "Benchmark generator; returns (data, ground_truth)");

    m.def("fit_ssa",
          [](const Matrix& data, int n_epochs, int d_s, int restarts, int max_iters,
             double grad_tol, double step_init, std::uint64_t seed) {
              TimeSeries series(data);
              return fit_ssa(series, make_epochs(series, n_epochs), d_s,
                             make_ssa_config(d_s, restarts, max_iters, grad_tol, step_init, seed));
          },
          py::arg("data"), py::arg("n_epochs"), py::arg("d_s"), py::arg("restarts") = 5,
          py::arg("max_iters") = 500, py::arg("grad_tol") = 1e-6, py::arg("step_init") = 1.0,
          py::arg("seed") = 0);

    m.def("extract_sources",
          [](const Matrix& data, const DemixingModel& model, const std::string& kind) {
              SourceKind k;
              if (kind == "s" || kind == "stationary") k = SourceKind::stationary;
              else if (kind == "n" || kind == "nonstationary") k = SourceKind::nonstationary;
              else throw ValidationError("kind must be 's' or 'n'");
              return extract_sources(TimeSeries(data), model, k).data;
          },
          py::arg("data"), py::arg("model"), py::arg("kind") = "n");

    m.def("select_order",
          [](const Matrix& data, int n_epochs, double alpha, int restarts, int max_iters,
             double grad_tol, std::uint64_t seed) {
              TimeSeries series(data);
              EpochStats stats = epoch_stats(series, make_epochs(series, n_epochs));
              EpochStats white = fit_whitening(stats).apply(stats);
              return select_order(white,
                                  make_ssa_config(1, restarts, max_iters, grad_tol, 1.0, seed),
                                  alpha);
          },
          py::arg("data"), py::arg("n_epochs"), py::arg("alpha") = 0.01, py::arg("restarts") = 5,
          py::arg("max_iters") = 500, py::arg("grad_tol") = 1e-6, py::arg("seed") = 0);

    m.def("chi2_cdf", &chi2_cdf, py::arg("x"), py::arg("dof"));

    m.def("kl_gauss_symmetrized", &kl_gauss_symmetrized, py::arg("mean_a"), py::arg("cov_a"),
          py::arg("mean_b"), py::arg("cov_b"));

    m.def("detect_slcd",
          [](const Matrix& data, int n_epochs, int k_clusters) {
              TimeSeries series(data);
              return slcd_detect(series, make_epochs(series, n_epochs), k_clusters);
          },
          py::arg("data"), py::arg("n_epochs") = 200, py::arg("k_clusters") = 5);

    m.def("detect_cusum",
          [](const Matrix& data, int n_epochs, int window, double threshold) {
              TimeSeries series(data);
              CusumConfig cfg;
              cfg.window = window;
              cfg.threshold = threshold;
              return cusum_detect(series, make_epochs(series, n_epochs), cfg);
          },
          py::arg("data"), py::arg("n_epochs"), py::arg("window") = 100,
          py::arg("threshold") = 10.0);

    m.def("detect_kohlmorgen_lemm",
          [](const Matrix& data, int n_epochs, int window, double cost, double sigma,
             std::optional<int> n_changepoints) {
              TimeSeries series(data);
              KohlLemmConfig cfg;
              cfg.window = window;
              cfg.cost = cost;
              cfg.sigma = sigma;
              cfg.fixed_n_changepoints = n_changepoints;
              return kohlmorgen_lemm_detect(series, make_epochs(series, n_epochs), cfg);
          },
          py::arg("data"), py::arg("n_epochs"), py::arg("window") = 50, py::arg("cost") = 1.0,
          py::arg("sigma") = 0.0, py::arg("n_changepoints") = std::nullopt);

    m.def("roc_from_scores",
          [](const std::vector<double>& scores, const std::vector<bool>& truth) {
              return roc_from_scores(scores, truth);
          },
          py::arg("scores"), py::arg("truth"));

    m.attr("__version__") = "0.1.0";
}
