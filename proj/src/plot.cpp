#include "ssacpd/plot.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "ssacpd/io.hpp"

namespace ssacpd {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;
constexpr int kMargin = 60;

double map_x(double v, double lo, double hi) {
    if (hi <= lo) return kMargin;
    return kMargin + (v - lo) / (hi - lo) * (kWidth - 2 * kMargin);
}

double map_y(double v, double lo, double hi) {
    if (hi <= lo) return kHeight - kMargin;
    return kHeight - kMargin - (v - lo) / (hi - lo) * (kHeight - 2 * kMargin);
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

void svg_header(std::ostringstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";
    out << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
        << kWidth - 2 * kMargin << "\" height=\"" << kHeight - 2 * kMargin
        << "\" fill=\"none\" stroke=\"black\"/>\n";
}

void axis_label(std::ostringstream& out, double px, double py, const std::string& text,
                bool vertical = false) {
    out << "<text x=\"" << px << "\" y=\"" << py << "\" text-anchor=\"middle\" font-size=\"12\"";
    if (vertical) out << " transform=\"rotate(-90 " << px << ' ' << py << ")\"";
    out << '>' << text << "</text>\n";
}

} // namespace

std::string svg_experiment_plot(const ExperimentResult& result, const std::string& title) {
    double x_lo = 1e300, x_hi = -1e300;
    for (const auto& c : result.cells) {
        x_lo = std::min(x_lo, c.grid_value);
        x_hi = std::max(x_hi, c.grid_value);
    }
    const double y_lo = 0.0, y_hi = 1.0;
    std::ostringstream out;
    svg_header(out, title);
    axis_label(out, kWidth / 2.0, kHeight - 16.0, "grid value");
    axis_label(out, 20.0, kHeight / 2.0, "AUC", true);
    // y ticks at 0, 0.25, ..., 1
    for (int i = 0; i <= 4; ++i) {
        double v = 0.25 * i;
        double py = map_y(v, y_lo, y_hi);
        out << "<line x1=\"" << kMargin - 4 << "\" y1=\"" << py << "\" x2=\"" << kMargin
            << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
        axis_label(out, kMargin - 22.0, py + 4.0, format_double(v));
    }
    std::map<Condition, std::vector<const ExperimentCell*>> by_cond;
    for (const auto& c : result.cells) by_cond[c.condition].push_back(&c);
    int color = 0;
    int legend_y = kMargin + 16;
    for (auto& [cond, cells] : by_cond) {
        std::sort(cells.begin(), cells.end(), [](const ExperimentCell* a, const ExperimentCell* b) {
            return a->grid_value < b->grid_value;
        });
        const char* col = kColors[color % 5];
        out << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
        for (const auto* c : cells) {
            out << map_x(c->grid_value, x_lo, x_hi) << ',' << map_y(c->median, y_lo, y_hi) << ' ';
        }
        out << "\"/>\n";
        for (const auto* c : cells) {
            double px = map_x(c->grid_value, x_lo, x_hi);
            out << "<line x1=\"" << px << "\" y1=\"" << map_y(c->q25, y_lo, y_hi) << "\" x2=\""
                << px << "\" y2=\"" << map_y(c->q75, y_lo, y_hi) << "\" stroke=\"" << col
                << "\"/>\n";
            out << "<circle cx=\"" << px << "\" cy=\"" << map_y(c->median, y_lo, y_hi)
                << "\" r=\"3\" fill=\"" << col << "\"/>\n";
        }
        out << "<text x=\"" << kWidth - kMargin - 8 << "\" y=\"" << legend_y
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << col << "\">"
            << condition_name(cond) << "</text>\n";
        legend_y += 16;
        ++color;
    }
    out << "</svg>\n";
    return out.str();
}

std::string svg_roc_plot(const RocCurve& roc, const std::string& title) {
    std::ostringstream out;
    svg_header(out, title);
    axis_label(out, kWidth / 2.0, kHeight - 16.0, "FPR");
    axis_label(out, 20.0, kHeight / 2.0, "TPR", true);
    out << "<line x1=\"" << map_x(0, 0, 1) << "\" y1=\"" << map_y(0, 0, 1) << "\" x2=\""
        << map_x(1, 0, 1) << "\" y2=\"" << map_y(1, 0, 1)
        << "\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& [fpr, tpr] : roc.points) {
        out << map_x(fpr, 0, 1) << ',' << map_y(tpr, 0, 1) << ' ';
    }
    out << "\"/>\n";
    axis_label(out, kWidth / 2.0, kMargin + 16.0, "AUC = " + format_double(roc.auc));
    out << "</svg>\n";
    return out.str();
}

} // namespace ssacpd
