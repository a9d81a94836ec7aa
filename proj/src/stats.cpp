#include "ntnpos/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ntnpos/errors.hpp"

namespace ntnpos {

double quantileSorted(std::span<const double> sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryStats summarize(std::span<const double> values, std::size_t degenerateCount) {
    if (values.empty()) throw EmptyStatisticsError("no non-degenerate samples to summarize");

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    SummaryStats s;
    s.count = sorted.size();
    s.degenerate = degenerateCount;
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    s.median = quantileSorted(sorted, 0.5);
    s.q1 = quantileSorted(sorted, 0.25);
    s.q3 = quantileSorted(sorted, 0.75);

    const double iqr = s.q3 - s.q1;
    const double lowFence = s.q1 - 1.5 * iqr;
    const double highFence = s.q3 + 1.5 * iqr;
    s.whiskerLow = s.q1;
    s.whiskerHigh = s.q3;
    for (double v : sorted) {
        if (v < lowFence || v > highFence) {
            ++s.outliers;
            continue;
        }
        s.whiskerLow = std::min(s.whiskerLow, v);
        s.whiskerHigh = std::max(s.whiskerHigh, v);
    }
    return s;
}

}  // namespace ntnpos
