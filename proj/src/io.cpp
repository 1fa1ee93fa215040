#include "ssacpd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

namespace ssacpd {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view token, std::size_t row, std::size_t col) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end) {
        throw IoError("CSV: cannot parse number at row " + std::to_string(row + 1) +
                      ", column " + std::to_string(col + 1));
    }
    return value;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

bool looks_numeric(std::string_view token) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    if (begin == end) return false;
    auto res = std::from_chars(begin, end, value);
    return res.ec == std::errc() && res.ptr == end;
}

} // namespace

TimeSeries read_csv_timeseries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> names;
    std::size_t row_idx = 0;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (first) {
            first = false;
            if (!looks_numeric(fields[0])) { // header row
                for (auto f : fields) {
                    std::string name(f);
                    while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) {
                        name.pop_back();
                    }
                    names.push_back(name);
                }
                continue;
            }
        }
        std::vector<double> row(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            row[c] = parse_double(fields[c], row_idx, c);
        }
        if (!rows.empty() && rows.front().size() != row.size()) {
            throw IoError("CSV: inconsistent column count at row " + std::to_string(row_idx + 1));
        }
        rows.push_back(std::move(row));
        ++row_idx;
    }
    if (rows.empty()) throw IoError("CSV: no data rows in '" + path.string() + "'");
    Matrix data(rows.front().size(), rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t c = 0; c < rows[t].size(); ++c) {
            data(static_cast<Index>(c), static_cast<Index>(t)) = rows[t][c];
        }
    }
    return TimeSeries(std::move(data), std::move(names));
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "'");
}

void write_csv_timeseries(const std::filesystem::path& path, const TimeSeries& series,
                          bool header) {
    std::ostringstream out;
    if (header) {
        for (Index c = 0; c < series.channels(); ++c) {
            if (c) out << ',';
            if (!series.channel_names.empty()) {
                out << series.channel_names[static_cast<std::size_t>(c)];
            } else {
                out << "ch" << c;
            }
        }
        out << '\n';
    }
    for (Index t = 0; t < series.samples(); ++t) {
        for (Index c = 0; c < series.channels(); ++c) {
            if (c) out << ',';
            out << format_double(series.data(c, t));
        }
        out << '\n';
    }
    write_text_atomic(path, out.str());
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw IoError("invalid JSON in '" + path.string() + "': " + e.what());
    }
    return j;
}

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& context) {
    if (!j.is_object()) throw ValidationError(context + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ValidationError(context + ": unknown key '" + key + "'");
    }
}

json matrix_to_json(const Matrix& m) {
    json data = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
    require_keys(j, {"rows", "cols", "data"}, "matrix");
    Index rows = j.at("rows").get<Index>();
    Index cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows * cols) {
        throw ValidationError("matrix: data length does not match rows*cols");
    }
    Matrix m(rows, cols);
    Index k = 0;
    for (Index i = 0; i < rows; ++i) {
        for (Index jj = 0; jj < cols; ++jj) m(i, jj) = data[static_cast<std::size_t>(k++)];
    }
    return m;
}

namespace {

json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vector vector_from_json(const json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)];
    return v;
}

json score_to_json(double v) {
    if (std::isfinite(v)) return v;
    return nullptr; // -inf scores (never-evaluated boundaries) map to null
}

double score_from_json(const json& j) {
    if (j.is_null()) return -std::numeric_limits<double>::infinity();
    return j.get<double>();
}

} // namespace

json to_json(const EpochStats& stats) {
    json means = json::array(), covs = json::array(), counts = json::array();
    for (Index i = 0; i < stats.n_epochs(); ++i) {
        means.push_back(vector_to_json(stats.means[i]));
        covs.push_back(matrix_to_json(stats.covariances[i]));
        counts.push_back(stats.counts[i]);
    }
    return json{{"means", means}, {"covariances", covs}, {"counts", counts}};
}

EpochStats epoch_stats_from_json(const json& j) {
    require_keys(j, {"means", "covariances", "counts"}, "EpochStats");
    std::vector<Vector> means;
    std::vector<Matrix> covs;
    std::vector<Index> counts;
    for (const auto& m : j.at("means")) means.push_back(vector_from_json(m));
    for (const auto& c : j.at("covariances")) covs.push_back(matrix_from_json(c));
    for (const auto& n : j.at("counts")) counts.push_back(n.get<Index>());
    return EpochStats(std::move(means), std::move(covs), std::move(counts));
}

json to_json(const WhiteningTransform& w) {
    return json{{"shift", vector_to_json(w.shift)}, {"matrix", matrix_to_json(w.matrix)}};
}

WhiteningTransform whitening_from_json(const json& j) {
    require_keys(j, {"shift", "matrix"}, "WhiteningTransform");
    WhiteningTransform w;
    w.shift = vector_from_json(j.at("shift"));
    w.matrix = matrix_from_json(j.at("matrix"));
    return w;
}

json to_json(const DemixingModel& model) {
    return json{{"whitening", to_json(model.whitening)},
                {"b_s", matrix_to_json(model.b_s)},
                {"b_n", matrix_to_json(model.b_n)},
                {"objective_s", model.objective_s},
                {"objective_n", model.objective_n}};
}

DemixingModel demixing_from_json(const json& j) {
    require_keys(j, {"whitening", "b_s", "b_n", "objective_s", "objective_n"}, "DemixingModel");
    DemixingModel m;
    m.whitening = whitening_from_json(j.at("whitening"));
    m.b_s = matrix_from_json(j.at("b_s"));
    m.b_n = matrix_from_json(j.at("b_n"));
    m.objective_s = j.at("objective_s");
    m.objective_n = j.at("objective_n");
    return m;
}

json to_json(const OrderSelection& sel) {
    json per_d = json::array();
    for (std::size_t i = 0; i < sel.per_d.size(); ++i) {
        const auto& t = sel.per_d[i];
        per_d.push_back(json{{"d", i + 1},
                             {"lambda", std::isfinite(t.lambda) ? json(t.lambda) : json(nullptr)},
                             {"dof", t.dof},
                             {"p_value", t.p_value}});
    }
    return json{{"alpha", sel.alpha}, {"per_d", per_d}, {"chosen_d_s", sel.chosen_d_s}};
}

json to_json(const BniseReport& report) {
    json per_d = json::array();
    for (const auto& e : report.per_d) {
        per_d.push_back(json{{"d", e.d},
                             {"loss", score_to_json(e.loss)},
                             {"perm_mean", score_to_json(e.perm_mean)},
                             {"perm_std", score_to_json(e.perm_std)},
                             {"z", e.z ? json(*e.z) : json(nullptr)},
                             {"bnise", e.bnise ? json(*e.bnise) : json(nullptr)}});
    }
    return json{{"per_d", per_d},
                {"n_permutations", report.n_permutations},
                {"seed", report.seed}};
}

json to_json(const ChangePointReport& report) {
    json flags = json::array(), scores = json::array();
    for (bool f : report.flags) flags.push_back(f);
    for (double s : report.scores) scores.push_back(score_to_json(s));
    return json{{"detector", detector_name(report.detector)},
                {"tau", report.tau},
                {"flags", flags},
                {"scores", scores}};
}

ChangePointReport report_from_json(const json& j) {
    require_keys(j, {"detector", "tau", "flags", "scores"}, "ChangePointReport");
    ChangePointReport r;
    r.detector = detector_from_name(j.at("detector"));
    r.tau = j.at("tau");
    for (const auto& f : j.at("flags")) r.flags.push_back(f.get<bool>());
    for (const auto& s : j.at("scores")) r.scores.push_back(score_from_json(s));
    if (r.flags.size() != r.scores.size()) {
        throw ValidationError("ChangePointReport: flags/scores lengths differ");
    }
    return r;
}

json to_json(const RocCurve& roc) {
    json points = json::array(), taus = json::array();
    for (const auto& [fpr, tpr] : roc.points) points.push_back(json::array({fpr, tpr}));
    for (double t : roc.tau_values) taus.push_back(score_to_json(t));
    return json{{"points", points}, {"tau_values", taus}, {"auc", roc.auc}};
}

RocCurve roc_from_json(const json& j) {
    require_keys(j, {"points", "tau_values", "auc", "confusion"}, "RocCurve");
    RocCurve roc;
    for (const auto& p : j.at("points")) {
        roc.points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    for (const auto& t : j.at("tau_values")) roc.tau_values.push_back(score_from_json(t));
    roc.auc = j.at("auc");
    return roc;
}

json to_json(const SynthConfig& config) {
    json j{{"D", config.D},
           {"d_s", config.d_s},
           {"d_n", config.d_n},
           {"n_epochs", config.n_epochs},
           {"epoch_len", config.epoch_len},
           {"p", config.p},
           {"n_states", config.n_states},
           {"p_stay", config.p_stay},
           {"seed", config.seed}};
    switch (config.mixing) {
        case MixingKind::identity: j["mixing"] = "identity"; break;
        case MixingKind::random_orthogonal: j["mixing"] = "random_orthogonal"; break;
        case MixingKind::random_conditioned:
            j["mixing"] = "random_conditioned";
            j["condition"] = config.condition;
            break;
    }
    return j;
}

SynthConfig synth_config_from_json(const json& j) {
    require_keys(j,
                 {"D", "d_s", "d_n", "n_epochs", "epoch_len", "p", "n_states", "p_stay", "seed",
                  "mixing", "condition"},
                 "SynthConfig");
    SynthConfig c;
    c.D = j.at("D");
    c.d_s = j.at("d_s");
    c.d_n = j.at("d_n");
    c.n_epochs = j.at("n_epochs");
    c.epoch_len = j.at("epoch_len");
    c.p = j.at("p");
    if (j.contains("n_states")) c.n_states = j.at("n_states");
    if (j.contains("p_stay")) c.p_stay = j.at("p_stay");
    if (j.contains("seed")) c.seed = j.at("seed");
    if (j.contains("mixing")) {
        std::string m = j.at("mixing");
        if (m == "identity") c.mixing = MixingKind::identity;
        else if (m == "random_orthogonal") c.mixing = MixingKind::random_orthogonal;
        else if (m == "random_conditioned") c.mixing = MixingKind::random_conditioned;
        else throw ValidationError("SynthConfig: unknown mixing '" + m + "'");
    }
    if (j.contains("condition")) c.condition = j.at("condition");
    c.validate();
    return c;
}

json sidecar_to_json(const SynthDataset& ds, const SynthConfig& config) {
    json states = json::array(), changes = json::array(), covs = json::array();
    for (int s : ds.state_seq) states.push_back(s);
    for (Index b : ds.true_changepoints) changes.push_back(b);
    for (const Vector& v : ds.state_covs) covs.push_back(vector_to_json(v));
    return json{{"config", to_json(config)},
                {"state_seq", states},
                {"true_changepoints", changes},
                {"mixing", matrix_to_json(ds.true_mixing)},
                {"state_covs", covs}};
}

json to_json(const ExperimentResult& result) {
    json cells = json::array();
    for (const auto& c : result.cells) {
        json samples = json::array();
        for (double a : c.auc_samples) samples.push_back(a);
        cells.push_back(json{{"grid_value", c.grid_value},
                             {"condition", condition_name(c.condition)},
                             {"auc_samples", samples},
                             {"q25", c.q25},
                             {"median", c.median},
                             {"q75", c.q75},
                             {"failures", c.failures}});
    }
    return json{{"cells", cells}};
}

ExperimentResult experiment_result_from_json(const json& j) {
    require_keys(j, {"cells"}, "ExperimentResult");
    ExperimentResult result;
    for (const auto& c : j.at("cells")) {
        ExperimentCell cell;
        cell.grid_value = c.at("grid_value");
        cell.condition = condition_from_name(c.at("condition"));
        for (const auto& a : c.at("auc_samples")) cell.auc_samples.push_back(a.get<double>());
        cell.q25 = c.at("q25");
        cell.median = c.at("median");
        cell.q75 = c.at("q75");
        cell.failures = c.at("failures");
        result.cells.push_back(std::move(cell));
    }
    return result;
}

std::string order_selection_csv(const OrderSelection& sel) {
    std::ostringstream out;
    out << "d_s,lambda,dof,p_value,decision\n";
    for (std::size_t i = 0; i < sel.per_d.size(); ++i) {
        const auto& t = sel.per_d[i];
        out << (i + 1) << ',' << format_double(t.lambda) << ',' << format_double(t.dof) << ','
            << format_double(t.p_value) << ','
            << (t.p_value >= sel.alpha ? "accept" : "reject") << '\n';
    }
    return out.str();
}

std::string bnise_csv(const BniseReport& report) {
    std::ostringstream out;
    out << "d,loss,perm_mean,perm_std,z,bnise\n";
    for (const auto& e : report.per_d) {
        out << e.d << ',' << format_double(e.loss) << ',' << format_double(e.perm_mean) << ','
            << format_double(e.perm_std) << ',' << (e.z ? format_double(*e.z) : "undefined")
            << ',' << (e.bnise ? format_double(*e.bnise) : "undefined") << '\n';
    }
    return out.str();
}

std::string report_csv(const ChangePointReport& report) {
    std::ostringstream out;
    out << "boundary_index,score\n";
    for (std::size_t i = 0; i < report.scores.size(); ++i) {
        out << i << ',' << format_double(report.scores[i]) << '\n';
    }
    return out.str();
}

std::string roc_csv(const RocCurve& roc) {
    std::ostringstream out;
    out << "fpr,tpr,tau\n";
    for (std::size_t i = 0; i < roc.points.size(); ++i) {
        out << format_double(roc.points[i].first) << ',' << format_double(roc.points[i].second)
            << ',' << format_double(roc.tau_values[i]) << '\n';
    }
    return out.str();
}

std::string experiment_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "grid_value,condition,q25,median,q75\n";
    for (const auto& c : result.cells) {
        out << format_double(c.grid_value) << ',' << condition_name(c.condition) << ','
            << format_double(c.q25) << ',' << format_double(c.median) << ','
            << format_double(c.q75) << '\n';
    }
    return out.str();
}

} // namespace ssacpd
