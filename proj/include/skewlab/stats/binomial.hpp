#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace skewlab {

struct MassEstimate {
    double estimate = 0.0, ci_low = 0.0, ci_high = 0.0;
    std::size_t samples = 0;
};

// Wilson score interval at z standard deviations.
inline MassEstimate wilson_interval(std::size_t hits, std::size_t n, double z = 1.96) {
    MassEstimate m;
    m.samples = n;
    if (n == 0) return m;
    const double nn = static_cast<double>(n), p = static_cast<double>(hits) / nn;
    const double denom = 1.0 + z * z / nn;
    const double centre = (p + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
    m.estimate = p;
    m.ci_low = std::max(0.0, centre - half);
    m.ci_high = std::min(1.0, centre + half);
    return m;
}

}  // namespace skewlab
