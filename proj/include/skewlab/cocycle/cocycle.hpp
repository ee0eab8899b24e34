#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>

#include "skewlab/core/error.hpp"
#include "skewlab/sft/gibbs.hpp"

namespace skewlab {

// Locally constant real function c(x) = table[x_lo .. x_hi] on the SFT.
// lo <= 0 <= hi. Past-only cocycles have hi == 0.
struct Cocycle {
    long lo = 0;
    long hi = 0;
    std::map<Word, double> table;
    double holder_beta = 1.0;  // any exponent works for locally constant functions

    std::size_t length() const { return static_cast<std::size_t>(hi - lo + 1); }
    bool past_only() const { return hi == 0; }

    double operator()(const Word& w) const {
        auto it = table.find(w);
        if (it == table.end()) throw DomainError("cocycle has no value for word [" + to_string(w) + "]");
        return it->second;
    }

    // c(sigma^k x) read off a window.
    double at(const SymbolicWindow& x, long k) const {
        if (!x.covers(k + lo) || !x.covers(k + hi))
            throw DomainError("window too short to evaluate the cocycle at shift " + std::to_string(k));
        return (*this)(x.slice(k + lo, k + hi));
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& [w, v] : table) m = std::max(m, std::abs(v));
        return m;
    }

    // Tabulates fn over every admissible word of the window.
    static Cocycle tabulate(const TransitionMatrix& a, long lo, long hi, const std::function<double(const Word&)>& fn) {
        require(lo <= 0 && hi >= 0, "cocycle window must contain coordinate 0");
        Cocycle c;
        c.lo = lo;
        c.hi = hi;
        for (const Word& w : a.words(static_cast<std::size_t>(hi - lo + 1))) c.table[w] = fn(w);
        return c;
    }

    static Cocycle zero(const TransitionMatrix& a) {
        return tabulate(a, 0, 0, [](const Word&) { return 0.0; });
    }

    // Checks the table covers exactly the admissible words of the window.
    void validate(const TransitionMatrix& a) const {
        require(lo <= 0 && hi >= 0, "cocycle window must contain coordinate 0");
        const auto words = a.words(length());
        require(words.size() == table.size(), "cocycle table must cover exactly the admissible words");
        for (const Word& w : words) {
            auto it = table.find(w);
            require(it != table.end(), "cocycle table misses word [" + to_string(w) + "]");
            require(std::isfinite(it->second), "cocycle value is not finite");
        }
    }
};

// Hashed lookup of a cocycle by the base-m code of its window, for hot loops.
class CocycleEvaluator {
public:
    CocycleEvaluator() = default;
    CocycleEvaluator(const Cocycle& c, std::size_t alphabet) : lo_(c.lo), hi_(c.hi), m_(alphabet) {
        for (const auto& [w, v] : c.table) values_.emplace(code(w.data()), v);
    }
    long lo() const { return lo_; }
    long hi() const { return hi_; }
    // `at` points to coordinate 0; reads at[lo] .. at[hi].
    double operator()(const Symbol* at) const {
        auto it = values_.find(code(at + lo_));
        if (it == values_.end()) throw DomainError("cocycle has no value for this window");
        return it->second;
    }

private:
    std::uint64_t code(const Symbol* w) const {
        std::uint64_t c = 0;
        for (long i = 0; i <= hi_ - lo_; ++i) c = c * m_ + w[i];
        return c;
    }
    long lo_ = 0, hi_ = 0;
    std::uint64_t m_ = 1;
    std::unordered_map<std::uint64_t, double> values_;
};

// S_n(x) = sum_{k<n} c(sigma^k x).
inline double birkhoff_sum(const Cocycle& c, const SymbolicWindow& x, long n) {
    require(n >= 0, "negative step count");
    if (n == 0) return 0.0;
    if (!x.covers(c.lo) || !x.covers(n - 1 + c.hi))
        throw DomainError("window too short for " + std::to_string(n) + " cocycle evaluations");
    double s = 0.0;
    for (long k = 0; k < n; ++k) s += c.at(x, k);
    return s;
}

inline double cocycle_mean(const Cocycle& c, const MarkovGibbs& mg) {
    double mean = 0.0;
    for (const auto& [w, v] : c.table) mean += mg.word_measure(w) * v;
    return mean;
}

// Subtracts the exact mean.
inline Cocycle center(const Cocycle& c, const MarkovGibbs& mg) {
    const double mean = cocycle_mean(c, mg);
    Cocycle out = c;
    for (auto& [w, v] : out.table) v -= mean;
    return out;
}

// Lexicographically least admissible continuation of length n after symbol s.
inline Word least_continuation(const TransitionMatrix& a, Symbol s, std::size_t n) {
    Word out;
    Symbol cur = s;
    for (std::size_t i = 0; i < n; ++i) {
        Symbol next = 0;
        while (!a.allowed(cur, next)) ++next;
        out.push_back(next);
        cur = next;
    }
    return out;
}

struct PastReduction {
    Cocycle past;      // depends on coordinates <= 0 only
    Cocycle transfer;  // h with c = past + h o sigma - h
};

// Cohomologous past-only version of c. Writing r(x) for the sequence that
// keeps x_i (i <= -1) and continues with the least continuation after x_{-1},
// h(x) = sum_{n=1}^{hi} [c(sigma^-n x) - c(sigma^-n r(x))] and
// past = c - h o sigma + h.
inline PastReduction reduce_to_past(const Cocycle& c, const MarkovGibbs& mg) {
    const TransitionMatrix& a = mg.matrix();
    if (c.hi == 0) return {c, Cocycle::zero(a)};
    const long wp = c.hi;
    const long h_lo = c.lo - wp, h_hi = wp - 1;

    // h on a word covering coordinates h_lo..h_hi
    auto h_of = [&](const Word& w) {
        auto coord = [&](long i) { return w[static_cast<std::size_t>(i - h_lo)]; };
        Word rx;  // r(x) on coordinates h_lo..h_hi
        for (long i = h_lo; i <= -1; ++i) rx.push_back(coord(i));
        const Word ext = least_continuation(a, coord(-1), static_cast<std::size_t>(h_hi + 1));
        rx.insert(rx.end(), ext.begin(), ext.end());
        double total = 0.0;
        for (long n = 1; n <= wp; ++n) {
            Word orig, red;
            for (long i = -n + c.lo; i <= -n + c.hi; ++i) {
                orig.push_back(coord(i));
                red.push_back(rx[static_cast<std::size_t>(i - h_lo)]);
            }
            total += c(orig) - c(red);
        }
        return total;
    };
    Cocycle h = Cocycle::tabulate(a, h_lo, h_hi, h_of);

    // past-only version: evaluate c - h o sigma + h on the word extended by the
    // least continuation after x_0; the result does not depend on the extension.
    auto past_of = [&](const Word& w) {
        Word full = w;  // coordinates h_lo..0
        const Word ext = least_continuation(a, w.back(), static_cast<std::size_t>(wp));
        full.insert(full.end(), ext.begin(), ext.end());  // coordinates h_lo..wp
        SymbolicWindow x;
        x.past.assign(full.begin(), full.begin() + (1 - h_lo));
        x.future.assign(full.begin() + (1 - h_lo), full.end());
        return c.at(x, 0) - h.at(x, 1) + h.at(x, 0);
    };
    Cocycle past = Cocycle::tabulate(a, h_lo, 0, past_of);
    past.holder_beta = c.holder_beta;
    return {past, h};
}

}  // namespace skewlab
