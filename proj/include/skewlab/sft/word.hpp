#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "skewlab/core/error.hpp"

namespace skewlab {

using Symbol = std::uint16_t;
using Word = std::vector<Symbol>;

inline std::string to_string(const Word& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(w[i]);
    }
    return s;
}

// A finite piece of a two-sided sequence: past[k] sits at coordinate
// k - (past.size() - 1), so past.back() is coordinate 0; future[k] is
// coordinate k + 1.
struct SymbolicWindow {
    Word past;
    Word future;

    long lo() const { return -static_cast<long>(past.size()) + 1; }
    long hi() const { return static_cast<long>(future.size()); }
    bool covers(long i) const { return i >= lo() && i <= hi(); }

    Symbol at(long i) const {
        if (!covers(i)) throw DomainError("coordinate " + std::to_string(i) + " outside window");
        return i <= 0 ? past[past.size() - 1 + static_cast<std::size_t>(i)]
                      : future[static_cast<std::size_t>(i - 1)];
    }

    // Contiguous symbols on coordinates [a, b].
    Word slice(long a, long b) const {
        Word out;
        out.reserve(static_cast<std::size_t>(b - a + 1));
        for (long i = a; i <= b; ++i) out.push_back(at(i));
        return out;
    }
};

struct D2Distance {
    double value;
    // false when the windows agree on everything both of them cover; value is
    // then the upper bound 2^-(R+1) for the common symmetric radius R.
    bool exact;
};

// D2(x, y) = 2^-k with k the largest integer such that x_i = y_i for |i| < k;
// a mismatch at coordinate 0 gives k = 0 and distance 1.
inline D2Distance metric_D2(const SymbolicWindow& a, const SymbolicWindow& b) {
    if (!a.covers(0) || !b.covers(0)) throw DomainError("window does not cover coordinate 0");
    const long radius = std::min(std::min(-a.lo(), a.hi()), std::min(-b.lo(), b.hi()));
    for (long r = 0; r <= radius; ++r) {
        if (a.at(r) != b.at(r) || a.at(-r) != b.at(-r))
            return {std::ldexp(1.0, static_cast<int>(-r)), true};
    }
    return {std::ldexp(1.0, static_cast<int>(-(radius + 1))), false};
}

}  // namespace skewlab
