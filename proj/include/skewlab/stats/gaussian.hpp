#pragma once

#include <cmath>
#include <numbers>

#include "skewlab/core/error.hpp"

namespace skewlab {

// N(0, variance) reference for S_n / sqrt(n).
struct GaussianRef {
    double variance = 1.0;

    explicit GaussianRef(double v) : variance(v) { require(v > 0.0, "Gaussian variance must be positive"); }

    double sd() const { return std::sqrt(variance); }
    double pdf(double t) const { return std::exp(-0.5 * t * t / variance) / std::sqrt(2.0 * std::numbers::pi * variance); }
    double cdf(double t) const { return 0.5 * std::erfc(-t / std::sqrt(2.0 * variance)); }
    // exp(-variance t^2 / 2): the unnormalized characteristic-function form
    // that appears in local limit statements; not a density.
    double unnormalized_form(double t) const { return std::exp(-0.5 * variance * t * t); }
    double quantile(double p) const;
};

// Standard normal quantile by bisection on erfc; accurate to ~1e-15 in t.
inline double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, "quantile level must lie in (0, 1)");
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double GaussianRef::quantile(double p) const { return sd() * normal_quantile(p); }

// Composite Simpson rule, n even.
template <class F>
double simpson(F&& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

}  // namespace skewlab
