#include <imbcal/resample.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace imbcal {

namespace {

struct ClassSplit
{
    std::vector<Eigen::Index> minority;
    std::vector<Eigen::Index> majority;
    double minority_label = 1.0;
};

ClassSplit split_classes(const Dataset& data, const char* context)
{
    data.require_both_classes(context);
    ClassSplit s;
    std::vector<Eigen::Index> events;
    std::vector<Eigen::Index> nonevents;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        (data.outcomes()[i] == 1.0 ? events : nonevents).push_back(i);
    }
    if (events.size() <= nonevents.size()) {
        s.minority = std::move(events);
        s.majority = std::move(nonevents);
        s.minority_label = 1.0;
    } else {
        s.minority = std::move(nonevents);
        s.majority = std::move(events);
        s.minority_label = 0.0;
    }
    return s;
}

double nearest_level(double v, const std::vector<double>& levels)
{
    double best = levels.front();
    for (double l : levels) {
        if (std::abs(l - v) < std::abs(best - v)) {
            best = l;
        }
    }
    return best;
}

} // namespace

std::string_view to_string(ResampleKind kind)
{
    switch (kind) {
    case ResampleKind::none:
        return "Unadjusted";
    case ResampleKind::rus:
        return "RUS";
    case ResampleKind::ros:
        return "ROS";
    case ResampleKind::smote:
        return "SMOTE";
    }
    return "?";
}

ResampleKind parse_resample_kind(std::string_view name)
{
    for (auto k : {ResampleKind::none, ResampleKind::rus, ResampleKind::ros, ResampleKind::smote}) {
        if (name == to_string(k)) {
            return k;
        }
    }
    if (name == "None") {
        return ResampleKind::none;
    }
    throw ConfigurationError("unknown resampling method '" + std::string(name) + "'");
}

void ResampleMethod::validate() const
{
    if (smote_k < 1) {
        throw ConfigurationError("ResampleMethod: smote_k must be at least 1");
    }
}

Dataset rus(const Dataset& data, RngStream& rng)
{
    auto s = split_classes(data, "rus");
    shuffle(s.majority.begin(), s.majority.end(), rng);
    std::vector<Eigen::Index> keep = s.minority;
    keep.insert(keep.end(), s.majority.begin(), s.majority.begin() + std::ptrdiff_t(s.minority.size()));
    std::sort(keep.begin(), keep.end());
    return data.select_rows(keep);
}

Dataset ros(const Dataset& data, RngStream& rng)
{
    const auto s = split_classes(data, "ros");
    std::vector<Eigen::Index> rows(std::size_t(data.rows()));
    std::iota(rows.begin(), rows.end(), Eigen::Index(0));
    const std::size_t extra = s.majority.size() - s.minority.size();
    for (std::size_t i = 0; i < extra; ++i) {
        rows.push_back(s.minority[rng.uniform_index(s.minority.size())]);
    }
    return data.select_rows(rows);
}

Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> nearest_neighbours(const Matrix& points, int k)
{
    const Eigen::Index m = points.rows();
    if (k < 1 || k > m - 1) {
        throw DomainError("nearest_neighbours: k must lie in [1, rows - 1]");
    }
    Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> out(m, k);
    std::vector<std::pair<double, Eigen::Index>> dist(std::size_t(m - 1));
    for (Eigen::Index i = 0; i < m; ++i) {
        std::size_t c = 0;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j != i) {
                dist[c++] = {(points.row(i) - points.row(j)).squaredNorm(), j};
            }
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        for (int r = 0; r < k; ++r) {
            out(i, r) = dist[std::size_t(r)].second;
        }
    }
    return out;
}

Dataset smote(const Dataset& data, int k, RngStream& rng, bool round_ordinal)
{
    if (k < 1) {
        throw ConfigurationError("smote: k must be at least 1");
    }
    const auto s = split_classes(data, "smote");
    const auto m = Eigen::Index(s.minority.size());
    if (m < 2) {
        throw DegenerateInputError("smote: at least two minority rows are required");
    }
    const int k_eff = int(std::min<Eigen::Index>(k, m - 1));
    Matrix minority(m, data.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
        minority.row(i) = data.features().row(s.minority[std::size_t(i)]);
    }
    const auto nn = nearest_neighbours(minority, k_eff);

    const auto extra = Eigen::Index(s.majority.size()) - m;
    Matrix x(data.rows() + extra, data.cols());
    Vector y(data.rows() + extra);
    x.topRows(data.rows()) = data.features();
    y.head(data.rows()) = data.outcomes();
    const auto& kinds = data.feature_kinds();
    for (Eigen::Index t = 0; t < extra; ++t) {
        const Eigen::Index base = t % m;
        const Eigen::Index nb = nn(base, Eigen::Index(rng.uniform_index(std::uint64_t(k_eff))));
        const double u = rng.uniform();
        auto row = x.row(data.rows() + t);
        row = minority.row(base) + u * (minority.row(nb) - minority.row(base));
        if (round_ordinal) {
            for (Eigen::Index j = 0; j < data.cols(); ++j) {
                if (kinds[std::size_t(j)].is_ordinal() && !kinds[std::size_t(j)].levels.empty()) {
                    row[j] = nearest_level(row[j], kinds[std::size_t(j)].levels);
                }
            }
        }
        y[data.rows() + t] = s.minority_label;
    }
    return Dataset(std::move(x), std::move(y), kinds);
}

Dataset resample(const Dataset& data, const ResampleMethod& method, RngStream& rng)
{
    method.validate();
    switch (method.kind) {
    case ResampleKind::none:
        return data;
    case ResampleKind::rus:
        return rus(data, rng);
    case ResampleKind::ros:
        return ros(data, rng);
    case ResampleKind::smote:
        return smote(data, method.smote_k, rng, method.smote_rounding);
    }
    return data;
}

} // namespace imbcal
