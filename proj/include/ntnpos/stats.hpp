#pragma once

#include <cstddef>
#include <span>

namespace ntnpos {

/// Box-plot statistics. Quartiles interpolate linearly between order statistics (position
/// p * (n - 1)); whiskers are the most extreme samples within 1.5 IQR of the quartiles.
struct SummaryStats {
    std::size_t count{0};       // non-degenerate samples
    std::size_t degenerate{0};
    double mean{0.0};
    double median{0.0};
    double q1{0.0};
    double q3{0.0};
    double whiskerLow{0.0};
    double whiskerHigh{0.0};
    std::size_t outliers{0};
};

/// `values` holds the non-degenerate samples. Throws EmptyStatisticsError when it is empty.
SummaryStats summarize(std::span<const double> values, std::size_t degenerateCount = 0);

/// Linear-interpolation quantile of sorted data, p in [0, 1].
double quantileSorted(std::span<const double> sorted, double p);

}  // namespace ntnpos
