#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace skewlab {

// sup |F_n - F| for sorted samples.
template <class Cdf>
double ks_statistic(const std::vector<double>& sorted, Cdf&& cdf) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

// Asymptotic p-value P(sqrt(n) D > x) from the Kolmogorov series.
inline double ks_pvalue(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double x = (sn + 0.12 + 0.11 / sn) * d;  // Stephens' small-sample correction
    if (x < 0.2) return 1.0;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
        p += term;
        if (std::fabs(term) < 1e-16) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

// sup over t of |F_a(t) - F_b(t)| for two sorted samples.
inline double two_sample_distance(const std::vector<double>& a, const std::vector<double>& b) {
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        const double t = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= t) ++i;
        while (j < b.size() && b[j] <= t) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

}  // namespace skewlab
