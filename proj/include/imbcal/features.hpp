#pragma once

#include <imbcal/core.hpp>

#include <array>
#include <vector>

namespace imbcal {

using SplineKnots = std::array<double, 3>;

// Knots at the 10th, 50th and 90th percentiles (type-7). Needs at least ten
// distinct values.
SplineKnots rcs_knots(const Vector& values);

// Restricted cubic spline with three knots: column 0 is x, column 1 the
// nonlinear term, linear beyond the outer knots and scaled by (k3 - k1)^2.
Matrix rcs_expand(const Vector& x, const SplineKnots& knots);

struct SplineTerm
{
    Eigen::Index column = 0;
    SplineKnots knots{};
};

// Knots for each listed column of `data`.
std::vector<SplineTerm> spline_terms(const Dataset& data, const std::vector<Eigen::Index>& columns);

// Appends the nonlinear spline column of every term after the existing columns.
Dataset apply_splines(const Dataset& data, const std::vector<SplineTerm>& terms);

} // namespace imbcal
