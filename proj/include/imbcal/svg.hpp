#pragma once

#include <optional>
#include <string>
#include <vector>

namespace imbcal {

struct BoxSeries
{
    std::string label;
    std::vector<std::vector<double>> values; // one sample per group
};

struct BoxplotData
{
    std::string title;
    std::string y_label;
    std::vector<std::string> groups;
    std::vector<BoxSeries> series;
    std::optional<double> reference; // dashed horizontal line
};

struct BoxStats
{
    double q25, median, q75;
    double whisker_low, whisker_high; // most extreme values within 1.5 IQR
    std::vector<double> outliers;
};

BoxStats box_stats(std::vector<double> values);

struct LineSeries
{
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct CalibrationPlotData
{
    std::string title;
    std::vector<LineSeries> curves;
};

struct DecisionCurveData
{
    std::string title;
    std::vector<double> thresholds;
    std::vector<double> treat_all;
    std::vector<LineSeries> models;
};

// Self-contained SVG documents. Empty input (no series, or a series without
// points) raises DomainError.
std::string render_boxplot(const BoxplotData& data);
std::string render_calibration_plot(const CalibrationPlotData& data);
std::string render_decision_curve(const DecisionCurveData& data);

// Escapes &, <, >, " for SVG text and attributes.
std::string xml_escape(const std::string& text);

} // namespace imbcal
