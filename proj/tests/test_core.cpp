#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <imbcal/core.hpp>
#include <imbcal/rng.hpp>
#include <imbcal/stats.hpp>

#include "oracles.hpp"

using namespace imbcal;

TEST_CASE("derive_stream is deterministic")
{
    auto a = derive_stream(42, {1, 0});
    auto b = derive_stream(42, {1, 0});
    for (int i = 0; i < 100; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("sibling paths give uncorrelated uniforms")
{
    auto a = derive_stream(42, {1, 0});
    auto b = derive_stream(42, {1, 1});
    std::vector<double> ua, ub;
    for (int i = 0; i < 1000; ++i) {
        ua.push_back(a.uniform());
        ub.push_back(b.uniform());
    }
    CHECK(std::abs(oracle::pearson(ua, ub)) < 0.1);
}

TEST_CASE("seed and path length both change the sequence")
{
    auto a = derive_stream(42, {1, 0});
    auto b = derive_stream(43, {1, 0});
    auto c = derive_stream(42, {1});
    CHECK(a.next_u64() != b.next_u64());
    CHECK(derive_stream(42, {1, 0}).key() != c.key());
    CHECK(derive_stream(42, {1}).child(0).key() == derive_stream(42, {1, 0}).key());
}

TEST_CASE("empty path is rejected")
{
    CHECK_THROWS_AS(derive_stream(1, {}), DomainError);
}

TEST_CASE("uniform and normal draws look right")
{
    auto rng = derive_stream(7, {3});
    double sum = 0, sumsq = 0, umin = 1, umax = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        umin = std::min(umin, u);
        umax = std::max(umax, u);
        const double z = rng.normal();
        sum += z;
        sumsq += z * z;
    }
    CHECK(umin > 0.0);
    CHECK(umax < 1.0);
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sumsq / n - 1.0) < 0.02);

    std::vector<int> hist(7, 0);
    for (int i = 0; i < 70000; ++i) {
        ++hist[rng.uniform_index(7)];
    }
    for (int h : hist) {
        CHECK(std::abs(h - 10000) < 500);
    }
}

TEST_CASE("logit and expit")
{
    CHECK(logit(0.5) == 0.0);
    CHECK(expit(0.0) == 0.5);
    CHECK(logit(0.01) == doctest::Approx(-4.59512).epsilon(1e-6));
    CHECK(logit(0.01) == doctest::Approx(std::log(0.01 / 0.99)).epsilon(1e-14));
    CHECK_THROWS_AS(logit(0.0), DomainError);
    CHECK_THROWS_AS(logit(1.0), DomainError);
    CHECK(expit(-800.0) >= 0.0);
    CHECK(expit(800.0) == 1.0);
}

TEST_CASE("logit/expit round trip and monotonicity")
{
    auto rng = derive_stream(11, {0});
    double prev_x = -30.0;
    double prev_e = expit(prev_x);
    for (int i = 0; i < 100000; ++i) {
        const double p = 1e-9 + (1.0 - 2e-9) * rng.uniform();
        REQUIRE(std::abs(expit(logit(p)) - p) <= 1e-12);
        const double x = prev_x + 60.0 / 100000.0;
        const double e = expit(x);
        REQUIRE(e >= prev_e);
        prev_x = x;
        prev_e = e;
    }
}

TEST_CASE("Dataset validates its invariants")
{
    Matrix x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    CHECK_NOTHROW(Dataset(x, Vector{{0.0, 1.0, 1.0}}));
    CHECK_THROWS_AS(Dataset(x, Vector{{0.0, 2.0, 1.0}}), DomainError);
    CHECK_THROWS_AS(Dataset(x, Vector{{0.0, 1.0}}), DimensionError);
    Matrix bad = x;
    bad(1, 1) = std::nan("");
    CHECK_THROWS_AS(Dataset(bad, Vector{{0.0, 1.0, 1.0}}), DomainError);

    Dataset d(x, Vector{{0.0, 1.0, 1.0}});
    CHECK(d.event_count() == 2);
    CHECK(d.has_both_classes());
    CHECK_THROWS_AS(Dataset(x, Vector::Zero(3)).require_both_classes("t"), DegenerateInputError);
    const auto s = d.select_rows({2, 2, 0});
    CHECK(s.rows() == 3);
    CHECK(s.features()(0, 0) == 5.0);
    CHECK(s.outcomes()[2] == 0.0);
}

TEST_CASE("PredictionSet clamps and keeps logit consistency")
{
    const Vector lp{{-100.0, -3.0, 0.0, 4.0, 100.0}};
    const auto ps = PredictionSet::from_linear_predictor(lp, Vector{{0.0, 0.0, 1.0, 1.0, 1.0}});
    for (Eigen::Index i = 0; i < lp.size(); ++i) {
        CHECK(ps.probabilities[i] >= probability_floor);
        CHECK(ps.probabilities[i] <= 1.0 - probability_floor);
        CHECK(std::abs(ps.linear_predictors[i] - logit(ps.probabilities[i])) <= 1e-10);
    }
    CHECK(ps.linear_predictors[2] == 0.0);
    CHECK(std::isfinite(ps.linear_predictors[0]));
}

TEST_CASE("type-7 quantiles")
{
    const auto m = median_iqr({1.0, 2.0, 3.0});
    CHECK(m.median == 2.0);
    CHECK(m.q25 == 1.5);
    CHECK(m.q75 == 2.5);
    const auto single = median_iqr({4.2});
    CHECK(single.median == 4.2);
    CHECK(single.q25 == 4.2);
    CHECK(single.q75 == 4.2);
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) {
        v.push_back(i);
    }
    CHECK(quantile(v, 0.1) == doctest::Approx(10.9));
    CHECK(quantile(v, 0.9) == doctest::Approx(90.1));
}
