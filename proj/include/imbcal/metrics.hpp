#pragma once

#include <imbcal/core.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

namespace imbcal {

// ---------------------------------------------------------------- AUROC

/// Area under the ROC curve as the normalized Mann-Whitney statistic,
/// computed from mid-ranks so tied scores count one half.
template <class ScoreDerived, class OutcomeDerived>
double auroc(const Eigen::DenseBase<ScoreDerived>& scores, const Eigen::DenseBase<OutcomeDerived>& outcomes)
{
    const Eigen::Index n = scores.size();
    if (outcomes.size() != n) {
        throw DimensionError("auroc: score and outcome lengths differ");
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return scores.derived().coeff(a) < scores.derived().coeff(b);
    });

    double events = 0.0;
    double event_rank_sum = 0.0;
    for (Eigen::Index start = 0; start < n;) {
        Eigen::Index stop = start + 1;
        const auto v = scores.derived().coeff(order[std::size_t(start)]);
        while (stop < n && scores.derived().coeff(order[std::size_t(stop)]) == v) {
            ++stop;
        }
        // ranks start+1 .. stop share their average
        const double mid_rank = 0.5 * double(start + 1 + stop);
        for (Eigen::Index k = start; k < stop; ++k) {
            if (outcomes.derived().coeff(order[std::size_t(k)]) != 0) {
                events += 1.0;
                event_rank_sum += mid_rank;
            }
        }
        start = stop;
    }
    const double nonevents = double(n) - events;
    if (events == 0.0 || nonevents == 0.0) {
        throw UndefinedMetricError("auroc: both outcome classes are required");
    }
    const double u = event_rank_sum - events * (events + 1.0) / 2.0;
    return u / (events * nonevents);
}

double auroc(const PredictionSet& preds);

// -------------------------------------------------------- classification

struct ConfusionCounts
{
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;
    double threshold = 0.5;

    std::int64_t total() const noexcept { return tp + fp + tn + fn; }

    double accuracy() const;
    // Empty when the sample has no events (no non-events for specificity).
    std::optional<double> sensitivity() const;
    std::optional<double> specificity() const;
};

// High risk iff probability >= threshold; threshold in (0,1).
ConfusionCounts classify(const PredictionSet& preds, double threshold);

// ----------------------------------------------------------- calibration

struct CalibrationFit
{
    double intercept_a = 0.0;
    std::optional<double> slope_b; // empty for offset (slope fixed at 1) fits
};

/// Solves sum(y - expit(a + offset)) = 0 for a. Newton iterations inside a
/// maintained bracket; stops once the score is within 1e-8 * n.
double offset_intercept(const Vector& offset, const Vector& outcomes);

// Logistic refit of outcomes on the linear predictor.
CalibrationFit calibration_fit(const PredictionSet& preds);

double calibration_intercept(const PredictionSet& preds);
double calibration_slope(const PredictionSet& preds);

struct CalibrationCurve
{
    Vector grid;
    Vector fitted;
    double span = 0.75;
};

/// Local-linear loess (tricube weights, no robustness iterations) of the
/// outcome on the predicted probability, evaluated on `grid_points` points
/// spanning the central 99% of predictions.
CalibrationCurve flexible_calibration_curve(const PredictionSet& preds, double span = 0.75, int grid_points = 100);

// Local-linear tricube smoother evaluated at `at`.
Vector loess_fit(const Vector& x, const Vector& y, const Vector& at, double span);

// ------------------------------------------------------------ net benefit

enum class NetBenefitWeight {
    odds,            // w = t / (1 - t)
    inverse_complement // w = 1 / (1 - t)
};

double net_benefit_weight(double threshold, NetBenefitWeight convention = NetBenefitWeight::odds);

// (TP - w * FP) / n with w taken from the threshold stored in `counts`.
double net_benefit(const ConfusionCounts& counts, std::int64_t n, NetBenefitWeight convention = NetBenefitWeight::odds);

struct DecisionCurvePoint
{
    double threshold;
    double model;
    double treat_all;
    double treat_none;
};

/// Net Benefit of the model, treat-all and treat-none at each threshold in
/// [0, 1). Threshold 0 treats everyone.
std::vector<DecisionCurvePoint> decision_curve(const PredictionSet& preds, const std::vector<double>& thresholds,
                                               NetBenefitWeight convention = NetBenefitWeight::odds);

std::vector<double> threshold_grid(double from, double to, double step);

} // namespace imbcal
