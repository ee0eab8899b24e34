#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "skewlab/cocycle/aperiodicity.hpp"
#include "skewlab/stats/binomial.hpp"
#include "skewlab/stats/clt.hpp"

namespace skewlab {

// x in [first] at coordinates 0.., sigma^n x in [second]; an empty word is
// the whole space.
struct CylinderPair {
    Word first;
    Word second;
};

struct MlltCell {
    double k = 0.0;
    CylinderPair pair;
    double lo = 0.0, hi = 0.0;  // I
    long n = 0;
    std::size_t hits = 0, samples = 0;
    double estimate = 0.0, ci_low = 0.0, ci_high = 0.0;  // sqrt(n) * probability
    double ratio = 0.0, ratio_low = 0.0, ratio_high = 0.0;
};

struct MlltSurface {
    std::vector<MlltCell> cells;
    double variance = 0.0;
    Periodicity verdict = Periodicity::inconclusive;

    double spread() const {
        double lo = HUGE_VAL, hi = 0.0;
        for (const auto& c : cells) {
            lo = std::min(lo, c.ratio);
            hi = std::max(hi, c.ratio);
        }
        return hi / lo;
    }
    // Worst case over the confidence intervals.
    double conservative_spread() const {
        double lo = HUGE_VAL, hi = 0.0;
        for (const auto& c : cells) {
            lo = std::min(lo, c.ratio_low);
            hi = std::max(hi, c.ratio_high);
        }
        return lo > 0.0 ? hi / lo : HUGE_VAL;
    }
};

namespace detail {

inline Periodicity mllt_precondition(const Cocycle& c, const MarkovGibbs& mg) {
    std::size_t p = 1;
    double words = static_cast<double>(mg.alphabet());
    while (p < 12 && words * static_cast<double>(mg.alphabet()) <= 2e6) {
        words *= static_cast<double>(mg.alphabet());
        ++p;
    }
    const Periodicity v = aperiodicity_test(c, mg, p).verdict;
    if (v == Periodicity::periodic)
        throw DomainError("cocycle has lattice orbit sums; the mixing local limit theorem takes a different form");
    return v;
}

template <class Start>
MlltSurface mllt_cells(const MarkovGibbs& mg, const Cocycle& c, const std::vector<double>& ks,
                       const std::vector<CylinderPair>& pairs, double lo, double hi, long n, std::size_t samples,
                       std::uint64_t seed, unsigned threads, Start&& start, bool conditional) {
    require(n >= 1 && samples >= 1, "need n >= 1 and at least one sample");
    require(hi > lo, "interval I must have positive length");
    require(!ks.empty() && !pairs.empty(), "need at least one k and one cylinder pair");
    MlltSurface out;
    out.verdict = mllt_precondition(c, mg);
    out.variance = clt_variance(c, mg);

    std::size_t l1 = 0, l2 = 0;
    for (const auto& p : pairs) {
        require(mg.matrix().admissible(p.first) && mg.matrix().admissible(p.second), "cylinder words must be admissible");
        l1 = std::max(l1, p.first.size());
        l2 = std::max(l2, p.second.size());
    }
    WordChain chain(mg, c.length());
    const auto values = chain.values(c);
    std::vector<Symbol> last(chain.size());
    for (std::size_t u = 0; u < chain.size(); ++u) last[u] = chain.word(u).back();
    const long shift = c.hi;  // state at time t carries c(sigma^{t - hi} x)
    const long horizon = std::max(n - 1 + shift, n + static_cast<long>(l2) - 1);
    const double root = std::sqrt(static_cast<double>(n));
    const std::size_t P = pairs.size(), K = ks.size();

    const auto sizes = chunk_sizes(samples, 16384);
    auto parts = run_chunks(sizes.size(), threads, [&](std::size_t chunk) {
        Rng rng = Rng::stream(seed, chunk);
        std::vector<std::size_t> hits(P * K, 0);
        Word head(l1), tail(l2);
        for (std::size_t i = 0; i < sizes[chunk]; ++i) {
            std::size_t u = start(rng);
            double s = 0.0;
            for (long t = 0;; ++t) {
                if (t < static_cast<long>(l1)) head[static_cast<std::size_t>(t)] = last[u];
                if (t >= n && t < n + static_cast<long>(l2)) tail[static_cast<std::size_t>(t - n)] = last[u];
                if (t >= shift && t < n + shift) s += values[u];
                if (t == horizon) break;
                u = chain.step(u, rng);
            }
            for (std::size_t p = 0; p < P; ++p) {
                const Word& a = pairs[p].first;
                const Word& b = pairs[p].second;
                if (!std::equal(a.begin(), a.end(), head.begin()) || !std::equal(b.begin(), b.end(), tail.begin())) continue;
                for (std::size_t k = 0; k < K; ++k) {
                    const double x = s - ks[k] * root;
                    if (x >= lo && x < hi) ++hits[p * K + k];
                }
            }
        }
        return hits;
    });

    const GaussianRef g(out.variance);
    for (std::size_t p = 0; p < P; ++p) {
        const double m1 = conditional || pairs[p].first.empty() ? 1.0 : mg.word_measure(pairs[p].first);
        const double m2 = pairs[p].second.empty() ? 1.0 : mg.word_measure(pairs[p].second);
        for (std::size_t k = 0; k < K; ++k) {
            MlltCell cell;
            cell.k = ks[k];
            cell.pair = pairs[p];
            cell.lo = lo;
            cell.hi = hi;
            cell.n = n;
            cell.samples = samples;
            for (const auto& h : parts) cell.hits += h[p * K + k];
            const MassEstimate m = wilson_interval(cell.hits, samples);
            cell.estimate = root * m.estimate;
            cell.ci_low = root * m.ci_low;
            cell.ci_high = root * m.ci_high;
            const double denom = m1 * m2 * g.pdf(ks[k]) * (hi - lo);
            cell.ratio = cell.estimate / denom;
            cell.ratio_low = cell.ci_low / denom;
            cell.ratio_high = cell.ci_high / denom;
            out.cells.push_back(cell);
        }
    }
    return out;
}

}  // namespace detail

// sqrt(n) mu(x in C1, sigma^n x in C2, S_n in k sqrt(n) + I) per cell and its
// ratio to mu(C1) mu(C2) g(k) |I|, g the N(0, rho^2) density.
inline MlltSurface mllt_surface(const MarkovGibbs& mg, const Cocycle& c, const std::vector<double>& ks,
                                const std::vector<CylinderPair>& pairs, double lo, double hi, long n,
                                std::size_t samples, std::uint64_t seed, unsigned threads = 1) {
    WordChain probe(mg, c.length());
    return detail::mllt_cells(mg, c, ks, pairs, lo, hi, n, samples, seed, threads,
                              [&](Rng& rng) { return probe.sample_stationary(rng); }, false);
}

// The same under the conditional measure given `past`; cylinders constrain
// sigma^n x only.
inline MlltSurface conditional_mllt_surface(const MarkovGibbs& mg, const Cocycle& c, const Word& past,
                                            const std::vector<double>& ks, const std::vector<Word>& ends, double lo,
                                            double hi, long n, std::size_t samples, std::uint64_t seed,
                                            unsigned threads = 1) {
    require(c.past_only(), "conditional experiments need a past-only cocycle (apply reduce_to_past)");
    require(mg.matrix().admissible(past) && past.size() >= c.length(), "past must be admissible and cover the cocycle window");
    std::vector<CylinderPair> pairs;
    for (const Word& e : ends) pairs.push_back({{}, e});
    WordChain probe(mg, c.length());
    return detail::mllt_cells(mg, c, ks, pairs, lo, hi, n, samples, seed, threads,
                              [&](Rng& rng) { return probe.state_after(past, rng); }, true);
}

inline void write_mllt_csv(std::ostream& out, const MlltSurface& s) {
    out << "k,first,second,lo,hi,n,hits,samples,estimate,ratio,ci_low,ci_high\n";
    out.precision(10);
    for (const auto& c : s.cells)
        out << c.k << ",\"" << to_string(c.pair.first) << "\",\"" << to_string(c.pair.second) << "\"," << c.lo << ','
            << c.hi << ',' << c.n << ',' << c.hits << ',' << c.samples << ',' << c.estimate << ',' << c.ratio << ','
            << c.ci_low << ',' << c.ci_high << '\n';
}

}  // namespace skewlab
