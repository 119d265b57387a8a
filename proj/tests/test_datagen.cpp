#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <imbcal/datagen.hpp>
#include <imbcal/metrics.hpp>

#include "oracles.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>

using namespace imbcal;

namespace {

DgmSolverOptions quick()
{
    DgmSolverOptions o;
    o.datasets = 3;
    o.restarts = 3;
    o.sample_size = 100000;
    return o;
}

std::vector<double> column(const Matrix& x, Eigen::Index j)
{
    return {x.col(j).data(), x.col(j).data() + x.rows()};
}

} // namespace

TEST_CASE("sample_predictors gives independent standard normal columns")
{
    DgmSpec spec;
    spec.p = 3;
    auto rng = derive_stream(1, {20, 1});
    const Matrix x = sample_predictors(spec, 100000, rng);
    for (Eigen::Index j = 0; j < 3; ++j) {
        const double mean = x.col(j).mean();
        const double sd = std::sqrt((x.col(j).array() - mean).square().sum() / double(x.rows() - 1));
        CHECK(std::abs(mean) <= 0.02);
        CHECK(sd >= 0.98);
        CHECK(sd <= 1.02);
        for (Eigen::Index k = j + 1; k < 3; ++k) {
            CHECK(std::abs(oracle::pearson(column(x, j), column(x, k))) < 0.02);
        }
    }
    auto one = derive_stream(1, {20, 2});
    const Matrix row = sample_predictors(spec, 1, one);
    CHECK(row.rows() == 1);
    CHECK(row.allFinite());
}

TEST_CASE("sample_outcomes event rates")
{
    DgmSpec spec;
    spec.p = 2;
    auto xs = derive_stream(2, {20, 3});
    const Matrix x = sample_predictors(spec, 100000, xs);
    auto ys = derive_stream(2, {20, 4});
    const double half = sample_outcomes(spec, x, ys).event_rate();
    CHECK(half >= 0.495);
    CHECK(half <= 0.505);

    spec.intercept = logit(0.3);
    const double thirty = sample_outcomes(spec, x, ys).event_rate();
    CHECK(thirty >= 0.295);
    CHECK(thirty <= 0.305);

    CHECK_THROWS_AS(sample_outcomes(spec, Matrix::Zero(4, 3), ys), DimensionError);
}

TEST_CASE("BFGS minimizes the Rosenbrock function")
{
    const Objective rosen = [](const Vector& v) {
        return 100.0 * std::pow(v[1] - v[0] * v[0], 2) + std::pow(1.0 - v[0], 2);
    };
    const auto res = minimize_bfgs(rosen, Vector{{-1.2, 1.0}});
    CHECK(res.converged);
    CHECK(std::abs(res.x[0] - 1.0) < 1e-4);
    CHECK(std::abs(res.x[1] - 1.0) < 1e-4);
}

TEST_CASE("expected AUROC matches the all-pairs expectation")
{
    DgmSpec spec;
    spec.p = 2;
    auto rng = derive_stream(3, {20, 5});
    const Matrix x = sample_predictors(spec, 300, rng);
    const DgmObjective objective(x, 0.2, 0.75);
    const double a = -1.2;
    const double b = 0.9;
    const Vector s = x.rowwise().sum();
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        for (Eigen::Index j = 0; j < s.size(); ++j) {
            if (i == j) {
                continue;
            }
            const double w = expit(a + b * s[i]) * (1.0 - expit(a + b * s[j]));
            den += w;
            num += s[i] > s[j] ? w : (s[i] == s[j] ? 0.5 * w : 0.0);
        }
    }
    CHECK(objective.expected_auroc(a, b) == doctest::Approx(num / den).epsilon(1e-12));
    CHECK(objective.expected_auroc(0.3, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("null targets give the null model")
{
    const auto spec = solve_dgm_coefficients(4, 0.5, 0.5, derive_stream(4, {20, 6}), quick());
    CHECK(std::abs(spec.intercept) < 1e-3);
    CHECK(std::abs(spec.beta) < 1e-3);
}

TEST_CASE("solved coefficients validate on fresh data")
{
    const auto opts = quick();
    const auto s3 = solve_dgm_coefficients(3, 0.3, 0.75, derive_stream(5, {20, 7}), opts);
    const auto v = validate_dgm(s3, 100000, derive_stream(5, {20, 8}));
    CHECK(std::abs(v.auroc - 0.75) <= 0.01);
    CHECK(std::abs(v.event_rate - 0.3) <= 0.01);

    // the intercept moves with the event fraction, the achieved AUROC does not
    const auto s3b = solve_dgm_coefficients(3, 0.1, 0.75, derive_stream(5, {20, 9}), opts);
    const auto vb = validate_dgm(s3b, 100000, derive_stream(5, {20, 10}));
    CHECK(s3b.intercept < s3.intercept - 0.5);
    CHECK(std::abs(vb.auroc - 0.75) <= 0.01);
    CHECK(std::abs(vb.event_rate - 0.1) <= 0.01);

    const auto s24 = solve_dgm_coefficients(24, 0.3, 0.75, derive_stream(5, {20, 11}), opts);
    CHECK(s24.beta < s3.beta);

    const auto rare = solve_dgm_coefficients(6, 0.01, 0.75, derive_stream(5, {20, 12}), opts);
    const double rate = validate_dgm(rare, 100000, derive_stream(5, {20, 13})).event_rate;
    CHECK(rate >= 0.008);
    CHECK(rate <= 0.012);
}

TEST_CASE("single-predictor beta matches a brute-force Monte Carlo search")
{
    const double target = 0.75;
    const auto spec = solve_dgm_coefficients(1, 0.5, target, derive_stream(6, {20, 14}), quick());

    // oracle: common random numbers at n = 1e6, AUROC of x by rank sums
    auto rng = derive_stream(6, {20, 15});
    const std::size_t n = 1000000;
    std::vector<std::pair<double, double>> xu(n);
    for (auto& [x, u] : xu) {
        x = rng.normal();
        u = rng.uniform();
    }
    std::sort(xu.begin(), xu.end());
    double best_beta = 0.0;
    double best_gap = INFINITY;
    for (double beta = 0.5; beta <= 3.0; beta += 0.01) {
        double events = 0.0;
        double rank_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (xu[i].second < 1.0 / (1.0 + std::exp(-beta * xu[i].first))) {
                events += 1.0;
                rank_sum += double(i + 1);
            }
        }
        const double nonevents = double(n) - events;
        const double auc = (rank_sum - events * (events + 1.0) / 2.0) / (events * nonevents);
        if (std::abs(auc - target) < best_gap) {
            best_gap = std::abs(auc - target);
            best_beta = beta;
        }
    }
    CHECK(std::abs(spec.beta - best_beta) <= 0.05 * best_beta);
}

TEST_CASE("solver failure reports the best objective")
{
    auto opts = quick();
    opts.datasets = 1;
    opts.restarts = 2;
    opts.sample_size = 2000;
    opts.bfgs.max_iterations = 0;
    try {
        solve_dgm_coefficients(3, 0.3, 0.75, derive_stream(7, {20, 16}), opts);
        FAIL("expected a solver error");
    } catch (const SolverError& e) {
        CHECK(std::isfinite(e.best_objective()));
        CHECK(e.best_objective() > 0.0);
    }
    CHECK_THROWS_AS(solve_dgm_coefficients(3, 1.2, 0.75, derive_stream(7, {1}), opts), ConfigurationError);
}

TEST_CASE("coefficient cache round trip reproduces simulated data")
{
    auto opts = quick();
    opts.datasets = 1;
    opts.sample_size = 20000;
    const auto spec = solve_dgm_coefficients(6, 0.1, 0.75, derive_stream(8, {20, 17}), opts);
    DgmSpec other{12, 0.3, 0.75, -1.234567890123456, 0.2};

    const auto path = (std::filesystem::temp_directory_path() / "imbcal_cache_test.csv").string();
    write_coefficient_cache(path, {spec, other});
    const auto loaded = read_coefficient_cache(path);
    std::filesystem::remove(path);
    REQUIRE(loaded.size() == 2);
    CHECK(format_coefficient_record(loaded[1]) == "12,0.3,0.75,-1.23456789012,0.2");

    const auto found = find_spec(loaded, 6, 0.1, 0.75);
    REQUIRE(found.has_value());
    CHECK(found->intercept == spec.intercept);
    CHECK(found->beta == spec.beta);
    CHECK_FALSE(find_spec(loaded, 3, 0.1, 0.75).has_value());

    const auto a = sample_dataset(spec, 500, derive_stream(9, {1}));
    const auto b = sample_dataset(*found, 500, derive_stream(9, {1}));
    CHECK(a.features() == b.features());
    CHECK(a.outcomes() == b.outcomes());
}

TEST_CASE("synthetic cohort")
{
    const auto cohort = synthetic_cohort(3369, 0.2, derive_stream(10, {20, 18}));
    CHECK(cohort.data.rows() == 3369);
    CHECK(cohort.columns.size() == 3);
    CHECK(std::abs(cohort.data.event_rate() - 0.2) < 0.03);
    CHECK(cohort.data.feature_kinds()[2].is_ordinal());
    CHECK(cohort.data.features().col(2).minCoeff() >= 0.0);
    CHECK(cohort.data.features().col(2).maxCoeff() <= 4.0);
}
