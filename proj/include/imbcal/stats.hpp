#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace imbcal {

// Sample quantile by linear interpolation between order statistics
// (Hyndman-Fan type 7). `sorted` must be ascending and non-empty.
inline double quantile_sorted(std::span<const double> sorted, double prob)
{
    const double h = (double(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double prob)
{
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, prob);
}

struct MedianIqr
{
    double median;
    double q25;
    double q75;
};

inline MedianIqr median_iqr(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    return {quantile_sorted(values, 0.5), quantile_sorted(values, 0.25), quantile_sorted(values, 0.75)};
}

} // namespace imbcal
