#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <imbcal/metrics.hpp>
#include <imbcal/rng.hpp>

#include "oracles.hpp"

using namespace imbcal;

namespace {

PredictionSet preds_from_probs(std::initializer_list<double> p, std::initializer_list<double> y)
{
    Vector pv(Eigen::Index(p.size())), yv(Eigen::Index(y.size()));
    Eigen::Index i = 0;
    for (double v : p) {
        pv[i++] = v;
    }
    i = 0;
    for (double v : y) {
        yv[i++] = v;
    }
    return PredictionSet::from_probabilities(pv, yv);
}

// random instance with deliberate ties: scores drawn from a small lattice
PredictionSet random_instance(RngStream& rng, Eigen::Index n)
{
    Vector s(n), y(n);
    do {
        const auto levels = 2 + rng.uniform_index(30);
        for (Eigen::Index i = 0; i < n; ++i) {
            y[i] = rng.uniform() < 0.3 ? 1.0 : 0.0;
            s[i] = (double(rng.uniform_index(levels)) + 0.5 + y[i] * 3.0 * rng.uniform()) / double(levels + 4);
        }
    } while (y.sum() == 0.0 || y.sum() == double(n));
    return PredictionSet::from_probabilities(s, y);
}

} // namespace

TEST_CASE("auroc examples")
{
    CHECK(auroc(preds_from_probs({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0})) == 1.0);
    CHECK(auroc(preds_from_probs({0.4, 0.4, 0.4, 0.4}, {1, 0, 1, 0})) == 0.5);
    CHECK(auroc(preds_from_probs({0.8, 0.7, 0.4, 0.3}, {1, 0, 1, 0})) == 0.75);
    CHECK_THROWS_AS(auroc(preds_from_probs({0.8, 0.7}, {1, 1})), UndefinedMetricError);
}

TEST_CASE("auroc equals the all-pairs oracle on random tied instances")
{
    auto rng = derive_stream(2024, {8, 1});
    for (int rep = 0; rep < 500; ++rep) {
        const auto n = Eigen::Index(2 + rng.uniform_index(199));
        const auto ps = random_instance(rng, n);
        REQUIRE(auroc(ps) == oracle::auroc_all_pairs(ps.probabilities, ps.outcomes));
    }
}

TEST_CASE("auroc is invariant under monotone transforms")
{
    auto rng = derive_stream(5, {8, 2});
    for (int rep = 0; rep < 50; ++rep) {
        const auto ps = random_instance(rng, 150);
        const Vector logits = ps.probabilities.unaryExpr([](double p) { return logit(p); });
        CHECK(auroc(ps.probabilities, ps.outcomes) == auroc(logits, ps.outcomes));
        CHECK(auroc(ps.probabilities.array().cube().matrix(), ps.outcomes) == auroc(ps.probabilities, ps.outcomes));
    }
}

TEST_CASE("classification counts and ratios")
{
    const auto two = classify(preds_from_probs({0.6, 0.4}, {1, 0}), 0.5);
    CHECK(two.tp == 1);
    CHECK(two.tn == 1);
    CHECK(two.accuracy() == 1.0);

    // boundary: p == t counts as high risk
    const auto tie = classify(preds_from_probs({0.5}, {1}), 0.5);
    CHECK(tie.tp == 1);
    CHECK_FALSE(tie.specificity().has_value());

    // all predictions low, rare events
    Vector p = Vector::Constant(1000, 0.02);
    Vector y = Vector::Zero(1000);
    y.head(10).setOnes();
    const auto rare = classify(PredictionSet::from_probabilities(p, y), 0.5);
    CHECK(*rare.sensitivity() == 0.0);
    CHECK(*rare.specificity() == 1.0);
    CHECK(rare.tp + rare.fn == 10);
    CHECK(rare.tn + rare.fp == 990);

    CHECK_THROWS_AS(classify(PredictionSet::from_probabilities(p, y), 1.0), DomainError);
    CHECK_THROWS_AS(classify(PredictionSet::from_probabilities(p, y), 0.0), DomainError);
}

TEST_CASE("confusion counts recompose on random data")
{
    auto rng = derive_stream(9, {8, 3});
    for (int rep = 0; rep < 50; ++rep) {
        const auto ps = random_instance(rng, 120);
        const double t = 0.05 + 0.9 * rng.uniform();
        const auto c = classify(ps, t);
        const auto events = std::int64_t(ps.outcomes.sum());
        CHECK(c.total() == ps.size());
        CHECK(c.tp + c.fn == events);
        CHECK(c.tn + c.fp == ps.size() - events);
    }
}

TEST_CASE("calibration intercept closed forms")
{
    // constant p equal to the event rate -> 0
    Vector y = Vector::Zero(400);
    y.head(100).setOnes();
    CHECK(std::abs(calibration_intercept(PredictionSet::from_probabilities(Vector::Constant(400, 0.25), y))) <= 1e-8);
    // constant 0.5 with event rate 0.25 -> logit(0.25)
    const double a = calibration_intercept(PredictionSet::from_probabilities(Vector::Constant(400, 0.5), y));
    CHECK(std::abs(a - std::log(0.25 / 0.75)) <= 1e-8);
    CHECK(a == doctest::Approx(-1.0986).epsilon(1e-4));
    CHECK_THROWS_AS(calibration_intercept(PredictionSet::from_probabilities(Vector::Constant(4, 0.5), Vector::Zero(4))),
                    UndefinedMetricError);
}

TEST_CASE("calibration intercept and slope under LP transformations")
{
    auto rng = derive_stream(21, {8, 4});
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::Index n = 500;
        Vector lp(n), y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            lp[i] = -1.0 + 1.3 * rng.normal();
            y[i] = rng.uniform() < expit(0.3 + 0.8 * lp[i]) ? 1.0 : 0.0;
        }
        const auto base = PredictionSet::from_linear_predictor(lp, y);
        const double slope = calibration_slope(base);
        const auto doubled = PredictionSet::from_linear_predictor(2.0 * lp, y);
        CHECK(calibration_slope(doubled) == doctest::Approx(slope / 2.0).epsilon(1e-12));

        const double c = 0.37;
        const auto shifted = PredictionSet::from_linear_predictor((lp.array() + c).matrix(), y);
        CHECK(calibration_intercept(shifted) == doctest::Approx(calibration_intercept(base) - c).epsilon(1e-9));
        CHECK(calibration_slope(shifted) == doctest::Approx(slope).epsilon(1e-9));

        // score equations hold at the solution
        const double a = calibration_intercept(base);
        double score = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            score += y[i] - expit(a + base.linear_predictors[i]);
        }
        CHECK(std::abs(score) <= 1e-8 * double(n));
    }
}

TEST_CASE("calibration slope is undefined for a constant LP")
{
    Vector y = Vector::Zero(10);
    y.head(3).setOnes();
    CHECK_THROWS_AS(calibration_slope(PredictionSet::from_probabilities(Vector::Constant(10, 0.3), y)),
                    UndefinedMetricError);
}

TEST_CASE("flexible calibration curve")
{
    SUBCASE("constant predictions give a flat curve at the event rate")
    {
        Vector y = Vector::Zero(200);
        y.head(50).setOnes();
        const auto curve = flexible_calibration_curve(PredictionSet::from_probabilities(Vector::Constant(200, 0.4), y));
        for (Eigen::Index g = 0; g < curve.fitted.size(); ++g) {
            CHECK(curve.fitted[g] == doctest::Approx(0.25));
        }
    }
    SUBCASE("perfectly calibrated large sample")
    {
        auto rng = derive_stream(77, {8, 5});
        const Eigen::Index n = 100000;
        Vector p(n), y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            p[i] = expit(-1.0 + 1.2 * rng.normal());
            y[i] = rng.uniform() < p[i] ? 1.0 : 0.0;
        }
        const auto curve = flexible_calibration_curve(PredictionSet::from_probabilities(p, y));
        CHECK(curve.grid.size() == 100);
        CHECK((curve.fitted - curve.grid).cwiseAbs().maxCoeff() <= 0.02);
        CHECK(curve.grid[0] >= p.minCoeff());
        CHECK(curve.grid[99] <= p.maxCoeff());
    }
    SUBCASE("too few points")
    {
        CHECK_THROWS_AS(flexible_calibration_curve(preds_from_probs({0.1, 0.2}, {0, 1})), UndefinedMetricError);
    }
    SUBCASE("loess reproduces a straight line")
    {
        const Vector x = Vector::LinSpaced(50, 0.0, 1.0);
        const Vector y = (0.2 + 0.5 * x.array()).matrix();
        const Vector at = Vector::LinSpaced(7, 0.1, 0.9);
        CHECK((loess_fit(x, y, at, 0.5) - (0.2 + 0.5 * at.array()).matrix()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("net benefit")
{
    ConfusionCounts c;
    c.tp = 2;
    c.fp = 1;
    c.threshold = 0.2;
    CHECK(net_benefit(c, 10) == doctest::Approx(0.175));
    CHECK(net_benefit(c, 10, NetBenefitWeight::inverse_complement) == doctest::Approx((2.0 - 1.25) / 10.0));
    c.threshold = 1.0;
    CHECK_THROWS_AS(net_benefit(c, 10), DomainError);
}

TEST_CASE("decision curve identities")
{
    auto rng = derive_stream(31, {8, 6});
    const auto ps = random_instance(rng, 200);
    const double prev = ps.outcomes.mean();
    const auto thresholds = threshold_grid(0.0, 0.5, 0.01);
    CHECK(thresholds.size() == 51);
    const auto curve = decision_curve(ps, thresholds);
    for (const auto& pt : curve) {
        CHECK(pt.treat_none == 0.0);
        CHECK(pt.treat_all == doctest::Approx(prev - (1.0 - prev) * pt.threshold / (1.0 - pt.threshold)));
        CHECK(pt.model <= prev + 1e-12);
        if (pt.threshold > 0.0) {
            CHECK(pt.model == doctest::Approx(net_benefit(classify(ps, pt.threshold), ps.size())));
        }
    }
    // everyone is treated at t = 0
    CHECK(curve.front().model == doctest::Approx(prev));
    CHECK(curve.front().treat_all == doctest::Approx(prev));
    CHECK(decision_curve(ps, {1e-9}).front().treat_all == doctest::Approx(prev).epsilon(1e-6));
}
