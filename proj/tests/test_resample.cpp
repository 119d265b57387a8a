#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <imbcal/resample.hpp>

#include <algorithm>
#include <map>
#include <numeric>

using namespace imbcal;

namespace {

Dataset imbalanced(RngStream& rng, Eigen::Index events, Eigen::Index nonevents, Eigen::Index p = 2)
{
    const Eigen::Index n = events + nonevents;
    Matrix x(n, p);
    Vector y = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            x(i, j) = rng.normal();
        }
    }
    // scatter the events through the rows
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index(0));
    shuffle(idx.begin(), idx.end(), rng);
    for (Eigen::Index e = 0; e < events; ++e) {
        y[idx[std::size_t(e)]] = 1.0;
    }
    return Dataset(x, y);
}

using Row = std::vector<double>;

std::map<Row, int> multiset(const Dataset& d)
{
    std::map<Row, int> out;
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        Row r;
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            r.push_back(d.features()(i, j));
        }
        r.push_back(d.outcomes()[i]);
        ++out[r];
    }
    return out;
}

bool sub_multiset(const std::map<Row, int>& small, const std::map<Row, int>& big)
{
    for (const auto& [row, count] : small) {
        const auto it = big.find(row);
        if (it == big.end() || it->second < count) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("random undersampling")
{
    auto gen = derive_stream(1, {30, 1});
    const auto d = imbalanced(gen, 100, 1900);
    auto rng = derive_stream(1, {30, 2});
    const auto out = rus(d, rng);
    CHECK(out.rows() == 200);
    CHECK(out.event_count() == 100);
    const auto in_set = multiset(d);
    const auto out_set = multiset(out);
    CHECK(sub_multiset(out_set, in_set));
    // every original event survives
    for (const auto& [row, count] : in_set) {
        if (row.back() == 1.0) {
            CHECK(out_set.count(row) == 1);
        }
    }

    auto g2 = derive_stream(1, {30, 3});
    const auto balanced = imbalanced(g2, 50, 50);
    CHECK(multiset(rus(balanced, rng)) == multiset(balanced));

    auto g3 = derive_stream(1, {30, 4});
    const auto edge = rus(imbalanced(g3, 1, 10), rng);
    CHECK(edge.rows() == 2);
    CHECK(edge.event_count() == 1);

    CHECK_THROWS_AS(rus(Dataset(Matrix::Zero(3, 1), Vector::Zero(3)), rng), DegenerateInputError);
}

TEST_CASE("random oversampling")
{
    auto gen = derive_stream(2, {30, 1});
    const auto d = imbalanced(gen, 100, 1900);
    auto rng = derive_stream(2, {30, 2});
    const auto out = ros(d, rng);
    CHECK(out.rows() == 3800);
    CHECK(out.event_count() == 1900);
    CHECK(out.features().topRows(d.rows()) == d.features());
    const auto in_set = multiset(d);
    for (Eigen::Index i = d.rows(); i < out.rows(); ++i) {
        CHECK(out.outcomes()[i] == 1.0);
    }
    CHECK(sub_multiset(in_set, multiset(out)));
    for (const auto& [row, count] : multiset(out)) {
        CHECK(in_set.count(row) == 1);
    }

    auto g2 = derive_stream(2, {30, 3});
    const auto balanced = imbalanced(g2, 40, 40);
    CHECK(multiset(ros(balanced, rng)) == multiset(balanced));

    auto g3 = derive_stream(2, {30, 4});
    const auto one = imbalanced(g3, 1, 5);
    const auto dup = ros(one, rng);
    CHECK(dup.event_count() == 5);
    for (const auto& [row, count] : multiset(dup)) {
        if (row.back() == 1.0) {
            CHECK(count == 5);
        }
    }
}

TEST_CASE("nearest neighbours match a full sort")
{
    auto rng = derive_stream(3, {30, 5});
    Matrix pts(60, 3);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) {
            pts(i, j) = double(rng.uniform_index(4)); // lattice, so ties occur
        }
    }
    const auto nn = nearest_neighbours(pts, 5);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        std::vector<Eigen::Index> others;
        for (Eigen::Index j = 0; j < pts.rows(); ++j) {
            if (j != i) {
                others.push_back(j);
            }
        }
        std::stable_sort(others.begin(), others.end(), [&](Eigen::Index a, Eigen::Index b) {
            return (pts.row(i) - pts.row(a)).squaredNorm() < (pts.row(i) - pts.row(b)).squaredNorm();
        });
        for (int r = 0; r < 5; ++r) {
            CHECK(nn(i, r) == others[std::size_t(r)]);
        }
    }
}

TEST_CASE("SMOTE examples")
{
    auto rng = derive_stream(4, {30, 6});
    SUBCASE("identical minority points")
    {
        Matrix x(8, 2);
        x << 1, 2, 1, 2, 0, 0, 3, 1, 5, 5, -1, 2, 4, 4, 0, 9;
        Vector y{{1, 1, 0, 0, 0, 0, 0, 0}};
        const auto out = smote(Dataset(x, y), 5, rng);
        CHECK(out.event_count() == 6);
        for (Eigen::Index i = 8; i < out.rows(); ++i) {
            CHECK(out.features()(i, 0) == 1.0);
            CHECK(out.features()(i, 1) == 2.0);
        }
    }
    SUBCASE("two-point interpolation")
    {
        Matrix x(12, 2);
        x.setConstant(7.0);
        x.row(0) << 0, 0;
        x.row(1) << 1, 1;
        Vector y = Vector::Zero(12);
        y[0] = y[1] = 1.0;
        const auto out = smote(Dataset(x, y), 5, rng);
        CHECK(out.rows() == 20);
        for (Eigen::Index i = 12; i < out.rows(); ++i) {
            const double a = out.features()(i, 0);
            CHECK(a == out.features()(i, 1));
            CHECK(a >= 0.0);
            CHECK(a <= 1.0);
            CHECK(out.outcomes()[i] == 1.0);
        }
    }
    SUBCASE("large imbalanced input")
    {
        auto gen = derive_stream(4, {30, 7});
        const auto d = imbalanced(gen, 100, 1900);
        const auto out = smote(d, 5, rng);
        CHECK(out.rows() == 3800);
        CHECK(out.event_count() == 1900);
        CHECK(out.features().topRows(d.rows()) == d.features());

        std::vector<Eigen::Index> minority_rows;
        for (Eigen::Index i = 0; i < d.rows(); ++i) {
            if (d.outcomes()[i] == 1.0) {
                minority_rows.push_back(i);
            }
        }
        Matrix minority(100, 2);
        for (Eigen::Index i = 0; i < 100; ++i) {
            minority.row(i) = d.features().row(minority_rows[std::size_t(i)]);
        }
        const auto nn = nearest_neighbours(minority, 5);
        for (Eigen::Index t = 0; t < 1800; ++t) {
            const auto base = minority.row(t % 100);
            const auto synth = out.features().row(d.rows() + t);
            bool on_segment = false;
            for (int r = 0; r < 5 && !on_segment; ++r) {
                const auto nb = minority.row(nn(t % 100, r));
                const double u = (synth[0] - base[0]) / (nb[0] - base[0]);
                on_segment = u >= 0.0 && u <= 1.0 && std::abs(base[1] + u * (nb[1] - base[1]) - synth[1]) < 1e-9;
            }
            CHECK(on_segment);
        }
    }
}

TEST_CASE("SMOTE edge cases")
{
    auto rng = derive_stream(5, {30, 8});
    Matrix x(6, 1);
    x << 0, 1, 2, 3, 4, 5;
    CHECK_THROWS_AS(smote(Dataset(x, Vector{{1, 0, 0, 0, 0, 0}}), 5, rng), DegenerateInputError);
    CHECK_THROWS_AS(smote(Dataset(x, Vector::Zero(6)), 5, rng), DegenerateInputError);
    // three minority rows: k drops to 2
    const auto out = smote(Dataset(x, Vector{{1, 1, 1, 0, 0, 0}}), 5, rng);
    CHECK(out.rows() == 6);
    const auto more = smote(Dataset(Matrix(Vector::LinSpaced(9, 0, 8)), Vector{{1, 0, 1, 0, 1, 0, 0, 0, 0}}), 5, rng);
    CHECK(more.event_count() == 6);
    for (Eigen::Index i = 9; i < more.rows(); ++i) {
        CHECK(more.features()(i, 0) >= 0.0);
        CHECK(more.features()(i, 0) <= 4.0);
    }
}

TEST_CASE("SMOTE rounds ordinal columns on request")
{
    auto rng = derive_stream(6, {30, 9});
    Matrix x(40, 2);
    Vector y = Vector::Zero(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = double(rng.uniform_index(5));
        y[i] = i < 10 ? 1.0 : 0.0;
    }
    const Dataset d(x, y, {FeatureKind::continuous(), FeatureKind::ordinal({0, 1, 2, 3, 4})});
    const auto rounded = smote(d, 5, rng, true);
    bool fractional_continuous = false;
    for (Eigen::Index i = 40; i < rounded.rows(); ++i) {
        const double v = rounded.features()(i, 1);
        CHECK(v == std::round(v));
        fractional_continuous |= rounded.features()(i, 0) != std::round(rounded.features()(i, 0));
    }
    CHECK(fractional_continuous);
}

TEST_CASE("resampling properties on random inputs")
{
    for (int rep = 0; rep < 30; ++rep) {
        auto gen = derive_stream(7, {30, 10, std::uint64_t(rep)});
        const auto events = Eigen::Index(2 + gen.uniform_index(40));
        const auto nonevents = Eigen::Index(1 + gen.uniform_index(120));
        const auto d = imbalanced(gen, events, nonevents, 3);
        const auto in_set = multiset(d);
        for (auto kind : {ResampleKind::rus, ResampleKind::ros, ResampleKind::smote}) {
            auto r1 = derive_stream(7, {31, std::uint64_t(rep)});
            auto r2 = derive_stream(7, {31, std::uint64_t(rep)});
            const auto out = resample(d, {kind}, r1);
            CHECK(out.event_count() == out.nonevent_count());
            const auto again = resample(d, {kind}, r2);
            CHECK(out.features() == again.features());
            CHECK(out.outcomes() == again.outcomes());
            if (kind == ResampleKind::rus) {
                CHECK(sub_multiset(multiset(out), in_set));
            } else {
                CHECK(sub_multiset(in_set, multiset(out)));
            }
        }
    }
    CHECK(parse_resample_kind("SMOTE") == ResampleKind::smote);
    CHECK(parse_resample_kind("Unadjusted") == ResampleKind::none);
    CHECK_THROWS_AS(parse_resample_kind("ADASYN"), ConfigurationError);
}
