#pragma once

#include <imbcal/core.hpp>
#include <imbcal/rng.hpp>

#include <string_view>

namespace imbcal {

enum class ResampleKind
{
    none,
    rus,
    ros,
    smote
};

std::string_view to_string(ResampleKind kind);
ResampleKind parse_resample_kind(std::string_view name);

struct ResampleMethod
{
    ResampleKind kind = ResampleKind::none;
    int smote_k = 5;
    bool smote_rounding = false; // round ordinal columns of synthetic rows

    void validate() const;
};

// Random undersampling of the majority class down to the minority count.
// Output keeps the original row order of the retained rows.
Dataset rus(const Dataset& data, RngStream& rng);

// Random oversampling of the minority class (with replacement) up to the
// majority count. The original rows come first, then the added copies.
Dataset ros(const Dataset& data, RngStream& rng);

// SMOTE: synthetic minority rows interpolated towards one of the k nearest
// minority neighbours, appended after the original rows.
Dataset smote(const Dataset& data, int k, RngStream& rng, bool round_ordinal = false);

Dataset resample(const Dataset& data, const ResampleMethod& method, RngStream& rng);

// k nearest minority neighbours (Euclidean; ties to the lower row) for each
// row of `points`, excluding the row itself. Row i of the result lists
// indices into `points`.
Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> nearest_neighbours(const Matrix& points, int k);

} // namespace imbcal
