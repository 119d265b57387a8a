#include <imbcal/features.hpp>
#include <imbcal/stats.hpp>

#include <algorithm>
#include <cmath>

namespace imbcal {

SplineKnots rcs_knots(const Vector& values)
{
    std::vector<double> v(values.data(), values.data() + values.size());
    std::sort(v.begin(), v.end());
    std::vector<double> uniq = v;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    if (uniq.size() < 10) {
        throw DegenerateInputError("rcs_knots: at least 10 distinct values are required, got " +
                                   std::to_string(uniq.size()));
    }
    SplineKnots k{quantile_sorted(v, 0.1), quantile_sorted(v, 0.5), quantile_sorted(v, 0.9)};
    if (!(k[0] < k[1] && k[1] < k[2])) {
        throw DegenerateInputError("rcs_knots: percentile knots are not strictly ascending");
    }
    return k;
}

Matrix rcs_expand(const Vector& x, const SplineKnots& knots)
{
    const auto [k1, k2, k3] = knots;
    if (!(k1 < k2 && k2 < k3)) {
        throw DomainError("rcs_expand: knots must be strictly ascending");
    }
    const auto cube = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
    const double scale = (k3 - k1) * (k3 - k1);
    Matrix out(x.size(), 2);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = x[i];
        out(i, 0) = v;
        out(i, 1) = (cube(v - k1) - cube(v - k2) * (k3 - k1) / (k3 - k2) + cube(v - k3) * (k2 - k1) / (k3 - k2)) /
                    scale;
    }
    return out;
}

std::vector<SplineTerm> spline_terms(const Dataset& data, const std::vector<Eigen::Index>& columns)
{
    std::vector<SplineTerm> terms;
    for (Eigen::Index c : columns) {
        if (c < 0 || c >= data.cols()) {
            throw DimensionError("spline_terms: column index out of range");
        }
        terms.push_back({c, rcs_knots(data.features().col(c))});
    }
    return terms;
}

Dataset apply_splines(const Dataset& data, const std::vector<SplineTerm>& terms)
{
    Matrix x(data.rows(), data.cols() + Eigen::Index(terms.size()));
    x.leftCols(data.cols()) = data.features();
    auto kinds = data.feature_kinds();
    for (std::size_t t = 0; t < terms.size(); ++t) {
        if (terms[t].column < 0 || terms[t].column >= data.cols()) {
            throw DimensionError("apply_splines: column index out of range");
        }
        x.col(data.cols() + Eigen::Index(t)) = rcs_expand(data.features().col(terms[t].column), terms[t].knots).col(1);
        kinds.push_back(FeatureKind::continuous());
    }
    return Dataset(std::move(x), data.outcomes(), std::move(kinds));
}

} // namespace imbcal
