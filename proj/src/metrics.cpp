#include <imbcal/metrics.hpp>
#include <imbcal/stats.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace imbcal {

double auroc(const PredictionSet& preds)
{
    const Vector& s = preds.scores.size() == preds.size() ? preds.scores : preds.linear_predictors;
    return auroc(s, preds.outcomes);
}

// ---------------------------------------------------------- classification

double ConfusionCounts::accuracy() const
{
    const auto n = total();
    if (n == 0) {
        throw UndefinedMetricError("accuracy: empty sample");
    }
    return double(tp + tn) / double(n);
}

std::optional<double> ConfusionCounts::sensitivity() const
{
    if (tp + fn == 0) {
        return std::nullopt;
    }
    return double(tp) / double(tp + fn);
}

std::optional<double> ConfusionCounts::specificity() const
{
    if (tn + fp == 0) {
        return std::nullopt;
    }
    return double(tn) / double(tn + fp);
}

namespace {

ConfusionCounts count_at(const PredictionSet& preds, double threshold)
{
    ConfusionCounts c;
    c.threshold = threshold;
    for (Eigen::Index i = 0; i < preds.size(); ++i) {
        const bool high = preds.probabilities[i] >= threshold;
        const bool event = preds.outcomes[i] != 0.0;
        if (high) {
            (event ? c.tp : c.fp) += 1;
        } else {
            (event ? c.fn : c.tn) += 1;
        }
    }
    return c;
}

} // namespace

ConfusionCounts classify(const PredictionSet& preds, double threshold)
{
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw DomainError("classify: threshold must lie in (0,1)");
    }
    return count_at(preds, threshold);
}

// ------------------------------------------------------------- calibration

double offset_intercept(const Vector& offset, const Vector& outcomes)
{
    const Eigen::Index n = offset.size();
    if (outcomes.size() != n) {
        throw DimensionError("offset_intercept: length mismatch");
    }
    const double events = outcomes.sum();
    if (events <= 0.0 || events >= double(n)) {
        throw UndefinedMetricError("offset_intercept: both outcome classes are required");
    }
    if (!offset.allFinite()) {
        throw DomainError("offset_intercept: non-finite linear predictor");
    }

    auto score = [&](double a, double& info) {
        double s = events;
        info = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = expit(a + offset[i]);
            s -= p;
            info += p * (1.0 - p);
        }
        return s;
    };

    const double tol = 1e-8 * double(n);
    // exact for a constant offset
    double a = logit(events / double(n)) - offset.mean();
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200; ++it) {
        double info = 0.0;
        const double s = score(a, info);
        if (std::abs(s) <= tol) {
            return a;
        }
        // score is decreasing in a
        if (s > 0.0) {
            lo = a;
        } else {
            hi = a;
        }
        double next = info > 0.0 ? a + s / info : std::numeric_limits<double>::quiet_NaN();
        const bool bracketed = std::isfinite(lo) && std::isfinite(hi);
        if (!std::isfinite(next) || (bracketed && (next <= lo || next >= hi))) {
            if (bracketed) {
                next = 0.5 * (lo + hi);
            } else {
                next = s > 0.0 ? a + std::max(1.0, std::abs(a)) : a - std::max(1.0, std::abs(a));
            }
        } else if (!bracketed) {
            // keep runaway Newton steps on flat tails bounded
            const double limit = 8.0 + std::abs(a);
            next = std::clamp(next, a - limit, a + limit);
        }
        if (bracketed && hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(a))) {
            return a;
        }
        a = next;
    }
    throw NonConvergenceError("offset_intercept: no convergence");
}

CalibrationFit calibration_fit(const PredictionSet& preds)
{
    const Vector& lp = preds.linear_predictors;
    const Vector& y = preds.outcomes;
    const Eigen::Index n = lp.size();
    const double events = y.sum();
    if (events <= 0.0 || events >= double(n)) {
        throw UndefinedMetricError("calibration slope: both outcome classes are required");
    }
    if (lp.maxCoeff() == lp.minCoeff()) {
        throw UndefinedMetricError("calibration slope: linear predictor is constant");
    }

    // Newton-Raphson with step halving on (a, b), started at (logit(ybar), 0)
    Eigen::Vector2d theta(logit(events / double(n)), 0.0);
    auto loglik = [&](const Eigen::Vector2d& t) {
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double eta = t[0] + t[1] * lp[i];
            // y*eta - log(1 + e^eta)
            const double soft = eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
            ll += y[i] * eta - soft;
        }
        return ll;
    };
    double ll = loglik(theta);
    const double tol = 1e-8 * double(n);
    for (int it = 0; it < 100; ++it) {
        Eigen::Vector2d g = Eigen::Vector2d::Zero();
        Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = expit(theta[0] + theta[1] * lp[i]);
            const double r = y[i] - p;
            const double w = p * (1.0 - p);
            g[0] += r;
            g[1] += r * lp[i];
            h(0, 0) += w;
            h(0, 1) += w * lp[i];
            h(1, 1) += w * lp[i] * lp[i];
        }
        h(1, 0) = h(0, 1);
        if (g.cwiseAbs().maxCoeff() <= tol) {
            // one more full Newton step takes the iterate to working precision
            const Eigen::Vector2d polished = theta + h.ldlt().solve(g);
            const double polished_ll = loglik(polished);
            if (std::isfinite(polished_ll) && polished_ll >= ll - 1e-12 * std::abs(ll)) {
                return {polished[0], polished[1]};
            }
            return {theta[0], theta[1]};
        }
        const Eigen::Vector2d step = h.ldlt().solve(g);
        double t = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half, t *= 0.5) {
            const Eigen::Vector2d cand = theta + t * step;
            const double cand_ll = loglik(cand);
            if (std::isfinite(cand_ll) && cand_ll >= ll - 1e-12 * std::abs(ll)) {
                theta = cand;
                ll = cand_ll;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }
    }
    // tolerance unattainable in floating point; the iterate is the optimum
    return {theta[0], theta[1]};
}

double calibration_intercept(const PredictionSet& preds)
{
    return offset_intercept(preds.linear_predictors, preds.outcomes);
}

double calibration_slope(const PredictionSet& preds)
{
    return *calibration_fit(preds).slope_b;
}

Vector loess_fit(const Vector& x, const Vector& y, const Vector& at, double span)
{
    const Eigen::Index n = x.size();
    if (n == 0 || y.size() != n) {
        throw DimensionError("loess_fit: bad input sizes");
    }
    if (!(span > 0.0)) {
        throw DomainError("loess_fit: span must be positive");
    }
    const auto q = std::clamp<Eigen::Index>(Eigen::Index(std::floor(double(n) * std::min(span, 1.0))), 1, n);

    Vector out(at.size());
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (Eigen::Index g = 0; g < at.size(); ++g) {
        const double x0 = at[g];
        for (Eigen::Index i = 0; i < n; ++i) {
            dist[std::size_t(i)] = std::abs(x[i] - x0);
        }
        std::vector<double> sorted = dist;
        std::nth_element(sorted.begin(), sorted.begin() + (q - 1), sorted.end());
        double h = sorted[std::size_t(q - 1)];
        if (span > 1.0) {
            h *= std::sqrt(span); // one predictor: enlarge the full-range bandwidth
        }

        double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double w;
            const double d = dist[std::size_t(i)];
            if (h <= 0.0) {
                w = d == 0.0 ? 1.0 : 0.0;
            } else {
                const double u = d / h;
                if (u >= 1.0) {
                    continue;
                }
                const double c = 1.0 - u * u * u;
                w = c * c * c;
            }
            if (w == 0.0) {
                continue;
            }
            const double dx = x[i] - x0;
            sw += w;
            swx += w * dx;
            swy += w * y[i];
            swxx += w * dx * dx;
            swxy += w * dx * y[i];
        }
        if (sw <= 0.0) {
            out[g] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double mx = swx / sw;
        const double my = swy / sw;
        const double sxx = swxx - sw * mx * mx;
        const double sxy = swxy - sw * mx * my;
        // centred at x0, so the fitted value is the local intercept
        const double slope = sxx > 1e-14 * std::max(1.0, swxx) ? sxy / sxx : 0.0;
        out[g] = my - slope * mx;
    }
    return out;
}

CalibrationCurve flexible_calibration_curve(const PredictionSet& preds, double span, int grid_points)
{
    const Eigen::Index n = preds.size();
    if (n < 25) {
        throw UndefinedMetricError("flexible calibration curve: at least 25 observations are required");
    }
    const double events = preds.outcomes.sum();
    if (events <= 0.0 || events >= double(n)) {
        throw UndefinedMetricError("flexible calibration curve: both outcome classes are required");
    }
    if (grid_points < 1) {
        throw DomainError("flexible calibration curve: grid needs at least one point");
    }
    std::vector<double> sorted(preds.probabilities.data(), preds.probabilities.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double lo = quantile_sorted(sorted, 0.005);
    const double hi = quantile_sorted(sorted, 0.995);

    CalibrationCurve curve;
    curve.span = span;
    curve.grid = Vector::LinSpaced(grid_points, lo, hi);
    curve.fitted = loess_fit(preds.probabilities, preds.outcomes, curve.grid, span)
                       .unaryExpr([](double v) { return std::clamp(v, 0.0, 1.0); });
    return curve;
}

// ------------------------------------------------------------- net benefit

double net_benefit_weight(double threshold, NetBenefitWeight convention)
{
    if (!(threshold >= 0.0 && threshold < 1.0)) {
        throw DomainError("net benefit: threshold must lie in [0,1)");
    }
    return convention == NetBenefitWeight::odds ? threshold / (1.0 - threshold) : 1.0 / (1.0 - threshold);
}

double net_benefit(const ConfusionCounts& counts, std::int64_t n, NetBenefitWeight convention)
{
    if (n <= 0) {
        throw DomainError("net benefit: n must be positive");
    }
    const double w = net_benefit_weight(counts.threshold, convention);
    return (double(counts.tp) - w * double(counts.fp)) / double(n);
}

std::vector<DecisionCurvePoint> decision_curve(const PredictionSet& preds, const std::vector<double>& thresholds,
                                               NetBenefitWeight convention)
{
    const auto n = static_cast<std::int64_t>(preds.size());
    if (n == 0) {
        throw UndefinedMetricError("decision curve: empty sample");
    }
    const auto events = static_cast<std::int64_t>(preds.outcomes.sum());
    std::vector<DecisionCurvePoint> out;
    out.reserve(thresholds.size());
    for (double t : thresholds) {
        ConfusionCounts all;
        all.threshold = t;
        all.tp = events;
        all.fp = n - events;
        out.push_back({t, net_benefit(count_at(preds, t), n, convention), net_benefit(all, n, convention), 0.0});
    }
    return out;
}

std::vector<double> threshold_grid(double from, double to, double step)
{
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
        out.push_back(from + double(i) * step);
    }
    return out;
}

} // namespace imbcal
