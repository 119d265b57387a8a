#include <imbcal/errors.hpp>
#include <imbcal/stats.hpp>
#include <imbcal/svg.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace imbcal {

namespace {

constexpr double width = 820.0;
constexpr double height = 500.0;
constexpr double left = 75.0;
constexpr double right = 170.0;
constexpr double top = 45.0;
constexpr double bottom = 65.0;
constexpr double plot_w = width - left - right;
constexpr double plot_h = height - top - bottom;

const char* const palette[] = {"#1b6ca8", "#d1495b", "#edae49", "#00798c", "#66a182", "#8d6a9f", "#2e4057", "#9c6644"};

const char* colour(std::size_t i)
{
    return palette[i % (sizeof palette / sizeof palette[0])];
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v)
{
    if (std::abs(v) < 1e-12) {
        v = 0.0;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct Axis
{
    double lo, hi;

    double map_y(double v) const { return top + plot_h * (hi - v) / (hi - lo); }
    double map_x(double v) const { return left + plot_w * (v - lo) / (hi - lo); }
};

std::vector<double> nice_ticks(double lo, double hi, int target = 6)
{
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        step = m * mag;
        if (span / step <= target) {
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + step * 1e-9; t += step) {
        ticks.push_back(t);
    }
    return ticks;
}

Axis padded(double lo, double hi)
{
    if (!(hi > lo)) {
        const double pad = std::max(std::abs(lo) * 0.1, 0.05);
        return {lo - pad, hi + pad};
    }
    const double pad = 0.06 * (hi - lo);
    return {lo - pad, hi + pad};
}

class Document
{
public:
    explicit Document(const std::string& title)
    {
        out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
             << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
             << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"Helvetica, Arial, sans-serif\">\n"
             << "<defs><clipPath id=\"plot-area\"><rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
             << "\" height=\"" << plot_h << "\"/></clipPath></defs>\n"
             << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
             << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << xml_escape(title)
             << "</text>\n";
    }

    std::ostringstream& body() { return out_; }

    void frame()
    {
        out_ << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
             << "\" fill=\"none\" stroke=\"#444\"/>\n";
    }

    void y_axis(const Axis& a, const std::string& label)
    {
        for (double t : nice_ticks(a.lo, a.hi)) {
            const double y = a.map_y(t);
            out_ << "<line x1=\"" << left - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << left << "\" y2=\"" << num(y)
                 << "\" stroke=\"#444\"/>"
                 << "<line x1=\"" << left << "\" y1=\"" << num(y) << "\" x2=\"" << left + plot_w << "\" y2=\""
                 << num(y) << "\" stroke=\"#e5e5e5\"/>"
                 << "<text x=\"" << left - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
                 << tick_label(t) << "</text>\n";
        }
        out_ << "<text transform=\"translate(18," << top + plot_h / 2
             << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(label) << "</text>\n";
    }

    void x_axis(const Axis& a, const std::string& label)
    {
        for (double t : nice_ticks(a.lo, a.hi)) {
            const double x = a.map_x(t);
            out_ << "<line x1=\"" << num(x) << "\" y1=\"" << top + plot_h << "\" x2=\"" << num(x) << "\" y2=\""
                 << top + plot_h + 5 << "\" stroke=\"#444\"/>"
                 << "<text x=\"" << num(x) << "\" y=\"" << top + plot_h + 19
                 << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(t) << "</text>\n";
        }
        x_label(label);
    }

    void x_label(const std::string& label)
    {
        out_ << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 18
             << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(label) << "</text>\n";
    }

    void legend(const std::vector<std::pair<std::string, std::string>>& entries, bool dashed_last = false)
    {
        double y = top + 10;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const bool dashed = dashed_last && i + 1 == entries.size();
            out_ << "<line x1=\"" << left + plot_w + 15 << "\" y1=\"" << y << "\" x2=\"" << left + plot_w + 40
                 << "\" y2=\"" << y << "\" stroke=\"" << entries[i].second << "\" stroke-width=\"3\""
                 << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>"
                 << "<text x=\"" << left + plot_w + 46 << "\" y=\"" << y + 4 << "\" font-size=\"12\">"
                 << xml_escape(entries[i].first) << "</text>\n";
            y += 20;
        }
    }

    std::string finish()
    {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    std::ostringstream out_;
};

void polyline(std::ostringstream& out, const LineSeries& s, const Axis& ax, const Axis& ay, const char* stroke,
              const char* cls, const char* dash = nullptr)
{
    if (s.x.size() == 1) {
        out << "<circle class=\"" << cls << " point\" cx=\"" << num(ax.map_x(s.x[0])) << "\" cy=\""
            << num(ay.map_y(s.y[0])) << "\" r=\"4\" fill=\"" << stroke << "\" clip-path=\"url(#plot-area)\"/>\n";
        return;
    }
    out << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"2\""
        << (dash ? std::string(" stroke-dasharray=\"") + dash + "\"" : std::string()) << " clip-path=\"url(#plot-area)\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        out << (i ? " " : "") << num(ax.map_x(s.x[i])) << ',' << num(ay.map_y(s.y[i]));
    }
    out << "\"/>\n";
}

void check_series(const LineSeries& s, const char* what)
{
    if (s.x.empty()) {
        throw DomainError(std::string(what) + ": series '" + s.label + "' is empty");
    }
    if (s.x.size() != s.y.size()) {
        throw DimensionError(std::string(what) + ": series '" + s.label + "' has unequal x and y lengths");
    }
}

} // namespace

std::string xml_escape(const std::string& text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

BoxStats box_stats(std::vector<double> values)
{
    if (values.empty()) {
        throw DomainError("box_stats: empty sample");
    }
    std::sort(values.begin(), values.end());
    BoxStats b;
    b.q25 = quantile_sorted(values, 0.25);
    b.median = quantile_sorted(values, 0.5);
    b.q75 = quantile_sorted(values, 0.75);
    const double iqr = b.q75 - b.q25;
    const double lo_fence = b.q25 - 1.5 * iqr;
    const double hi_fence = b.q75 + 1.5 * iqr;
    b.whisker_low = b.q25;
    b.whisker_high = b.q75;
    for (double v : values) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
        } else {
            b.whisker_low = std::min(b.whisker_low, v);
            b.whisker_high = std::max(b.whisker_high, v);
        }
    }
    return b;
}

std::string render_boxplot(const BoxplotData& data)
{
    if (data.series.empty() || data.groups.empty()) {
        throw DomainError("render_boxplot: no series");
    }
    std::vector<std::vector<std::optional<BoxStats>>> stats(data.series.size());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    bool any = false;
    for (std::size_t s = 0; s < data.series.size(); ++s) {
        const auto& series = data.series[s];
        if (series.values.size() != data.groups.size()) {
            throw DimensionError("render_boxplot: series '" + series.label + "' does not have one sample per group");
        }
        bool series_any = false;
        for (const auto& v : series.values) {
            if (v.empty()) {
                stats[s].emplace_back();
                continue;
            }
            auto b = box_stats(v);
            lo = std::min(lo, b.whisker_low);
            hi = std::max(hi, b.whisker_high);
            stats[s].emplace_back(std::move(b));
            series_any = true;
        }
        if (!series_any) {
            throw DomainError("render_boxplot: series '" + series.label + "' is empty");
        }
        any = true;
    }
    if (!any) {
        throw DomainError("render_boxplot: no values");
    }
    if (data.reference) {
        lo = std::min(lo, *data.reference);
        hi = std::max(hi, *data.reference);
    }
    // outliers extend the axis up to one whisker span; farther ones are drawn
    // as triangles on the edge
    const double span = std::max(hi - lo, 1e-9);
    for (const auto& per : stats) {
        for (const auto& b : per) {
            if (!b) {
                continue;
            }
            for (double o : b->outliers) {
                if (o >= lo - span && o <= hi + span) {
                    lo = std::min(lo, o);
                    hi = std::max(hi, o);
                }
            }
        }
    }
    const Axis ay = padded(lo, hi);

    Document doc(data.title);
    auto& out = doc.body();
    doc.y_axis(ay, data.y_label);
    if (data.reference) {
        const double y = ay.map_y(*data.reference);
        out << "<line class=\"reference\" x1=\"" << left << "\" y1=\"" << num(y) << "\" x2=\"" << left + plot_w
            << "\" y2=\"" << num(y) << "\" stroke=\"#777\" stroke-dasharray=\"6 4\"/>\n";
    }

    const double group_w = plot_w / double(data.groups.size());
    const double box_w = 0.8 * group_w / double(data.series.size());
    for (std::size_t g = 0; g < data.groups.size(); ++g) {
        const double gx = left + group_w * double(g);
        out << "<text x=\"" << num(gx + group_w / 2) << "\" y=\"" << top + plot_h + 19
            << "\" text-anchor=\"middle\" font-size=\"11\">" << xml_escape(data.groups[g]) << "</text>\n";
        for (std::size_t s = 0; s < data.series.size(); ++s) {
            const auto& b = stats[s][g];
            if (!b) {
                continue;
            }
            const double x0 = gx + 0.1 * group_w + box_w * double(s);
            const double xc = x0 + box_w / 2;
            const char* c = colour(s);
            out << "<g class=\"box\" stroke=\"" << c << "\">"
                << "<line x1=\"" << num(xc) << "\" y1=\"" << num(ay.map_y(b->whisker_low)) << "\" x2=\"" << num(xc)
                << "\" y2=\"" << num(ay.map_y(b->whisker_high)) << "\"/>"
                << "<rect x=\"" << num(x0 + 0.1 * box_w) << "\" y=\"" << num(ay.map_y(b->q75)) << "\" width=\""
                << num(0.8 * box_w) << "\" height=\"" << num(std::max(ay.map_y(b->q25) - ay.map_y(b->q75), 0.5))
                << "\" fill=\"" << c << "\" fill-opacity=\"0.3\"/>"
                << "<line class=\"median\" x1=\"" << num(x0 + 0.1 * box_w) << "\" y1=\"" << num(ay.map_y(b->median))
                << "\" x2=\"" << num(x0 + 0.9 * box_w) << "\" y2=\"" << num(ay.map_y(b->median))
                << "\" stroke-width=\"2\"/>";
            for (double o : b->outliers) {
                if (o < ay.lo || o > ay.hi) {
                    const double edge = o < ay.lo ? top + plot_h - 4 : top + 4;
                    const double d = o < ay.lo ? 4 : -4;
                    out << "<path class=\"outlier clipped\" d=\"M" << num(xc - 3) << ',' << num(edge - d) << " L"
                        << num(xc + 3) << ',' << num(edge - d) << " L" << num(xc) << ',' << num(edge) << " Z\" fill=\""
                        << c << "\"/>";
                } else {
                    out << "<circle class=\"outlier\" cx=\"" << num(xc) << "\" cy=\"" << num(ay.map_y(o))
                        << "\" r=\"1.8\" fill=\"none\"/>";
                }
            }
            out << "</g>\n";
        }
    }
    doc.frame();
    doc.x_label("Scenario");
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::size_t s = 0; s < data.series.size(); ++s) {
        entries.emplace_back(data.series[s].label, colour(s));
    }
    doc.legend(entries);
    return doc.finish();
}

std::string render_calibration_plot(const CalibrationPlotData& data)
{
    if (data.curves.empty()) {
        throw DomainError("render_calibration_plot: no series");
    }
    for (const auto& c : data.curves) {
        check_series(c, "render_calibration_plot");
    }
    const Axis a{0.0, 1.0};
    Document doc(data.title);
    auto& out = doc.body();
    doc.y_axis(a, "Observed proportion");
    doc.x_axis(a, "Estimated probability");
    out << "<line class=\"identity\" x1=\"" << a.map_x(0) << "\" y1=\"" << a.map_y(0) << "\" x2=\"" << a.map_x(1)
        << "\" y2=\"" << a.map_y(1) << "\" stroke=\"#777\" stroke-dasharray=\"6 4\"/>\n";
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::size_t i = 0; i < data.curves.size(); ++i) {
        polyline(out, data.curves[i], a, a, colour(i), "curve");
        entries.emplace_back(data.curves[i].label, colour(i));
    }
    entries.emplace_back("Ideal", "#777");
    doc.frame();
    doc.legend(entries, true);
    return doc.finish();
}

std::string render_decision_curve(const DecisionCurveData& data)
{
    if (data.models.empty() || data.thresholds.empty()) {
        throw DomainError("render_decision_curve: no series");
    }
    if (data.treat_all.size() != data.thresholds.size()) {
        throw DimensionError("render_decision_curve: treat-all needs one value per threshold");
    }
    double ymax = 0.0;
    double ymin = 0.0;
    for (double v : data.treat_all) {
        ymax = std::max(ymax, v);
    }
    for (const auto& m : data.models) {
        check_series(m, "render_decision_curve");
        for (double v : m.y) {
            ymax = std::max(ymax, v);
            ymin = std::min(ymin, v);
        }
    }
    ymax = std::max(ymax, 0.01);
    // keep strongly negative curves from flattening the interesting range
    ymin = std::max(ymin, -0.5 * ymax);
    const double xlo = *std::min_element(data.thresholds.begin(), data.thresholds.end());
    const double xhi = *std::max_element(data.thresholds.begin(), data.thresholds.end());
    const Axis ax = xhi > xlo ? Axis{xlo, xhi} : padded(xlo, xhi);
    const Axis ay = padded(ymin, ymax);

    Document doc(data.title);
    auto& out = doc.body();
    doc.y_axis(ay, "Net Benefit");
    doc.x_axis(ax, "Risk threshold");
    out << "<line class=\"treat-none\" x1=\"" << left << "\" y1=\"" << num(ay.map_y(0)) << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << num(ay.map_y(0)) << "\" stroke=\"#222\" stroke-width=\"1.5\"/>\n";
    polyline(out, LineSeries{"Treat all", data.thresholds, data.treat_all}, ax, ay, "#999", "treat-all", "3 3");
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::size_t i = 0; i < data.models.size(); ++i) {
        polyline(out, data.models[i], ax, ay, colour(i), "curve");
        entries.emplace_back(data.models[i].label, colour(i));
    }
    entries.emplace_back("Treat all", "#999");
    entries.emplace_back("Treat none", "#222");
    doc.frame();
    doc.legend(entries);
    return doc.finish();
}

} // namespace imbcal
