#pragma once

#include <cmath>
#include <vector>

#include "skewlab/core/error.hpp"

namespace skewlab {

inline double distance_to_integer(long double v) {
    return static_cast<double>(std::fabs(v - std::nearbyint(v)));
}

// alpha = [0; a_1, a_2, ...] with denominators q_0 = 1, q_1 = a_1,
// q_n = a_n q_{n-1} + q_{n-2}, and the approximation errors ||q_n alpha||.
struct ContinuedFraction {
    std::vector<long long> quotients;     // a_1 .. a_N
    std::vector<long long> denominators;  // q_0 .. q_N
    std::vector<double> errors;           // ||q_n alpha||
};

inline ContinuedFraction continued_fraction(double alpha, std::size_t levels) {
    require(alpha > 0.0 && alpha < 1.0, "rotation number must lie in (0,1)");
    ContinuedFraction cf;
    cf.denominators.push_back(1);
    cf.errors.push_back(distance_to_integer(static_cast<long double>(alpha)));
    long long q_prev = 0, q = 1;
    long double r = alpha;
    for (std::size_t n = 1; n <= levels; ++n) {
        // stop once the error reaches float resolution: alpha is rational for our purposes
        if (cf.errors.back() < 1e-13 * static_cast<double>(q) || r < 1e-13L)
            throw DomainError("rotation number is rational within floating-point resolution");
        const long double inv = 1.0L / r;
        const long long a = static_cast<long long>(std::floor(inv));
        r = inv - static_cast<long double>(a);
        const long long next = a * q + q_prev;
        q_prev = q;
        q = next;
        cf.quotients.push_back(a);
        cf.denominators.push_back(q);
        cf.errors.push_back(distance_to_integer(static_cast<long double>(q) * static_cast<long double>(alpha)));
    }
    return cf;
}

// [0; a_1, ..., a_k, 1, 1, 1, ...]: a prescribed head followed by a golden tail.
inline double alpha_from_quotients(const std::vector<long long>& head) {
    long double x = (std::sqrt(5.0L) - 1.0L) / 2.0L;
    for (auto it = head.rbegin(); it != head.rend(); ++it) {
        require(*it >= 1, "partial quotients must be positive");
        x = 1.0L / (static_cast<long double>(*it) + x);
    }
    return static_cast<double>(x);
}

}  // namespace skewlab
