#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "skewlab/cocycle/green_kubo.hpp"
#include "skewlab/cocycle/word_chain.hpp"
#include "skewlab/core/parallel.hpp"
#include "skewlab/stats/gaussian.hpp"
#include "skewlab/stats/ks.hpp"

namespace skewlab {

struct CltReport {
    double ks = 0.0;
    double p_value = 0.0;
    double variance = 0.0;            // Green-Kubo
    double empirical_variance = 0.0;  // of S_n / sqrt(n)
    long n = 0;
    std::vector<double> normalized;   // sorted S_n / sqrt(n)
};

namespace detail {

// S_n along the chain from a start state chosen by `start(rng)`; the state
// at each time carries the cocycle value to add.
template <class Start>
std::vector<double> birkhoff_samples(const WordChain& chain, const std::vector<double>& values, long n,
                                     std::size_t samples, std::uint64_t seed, unsigned threads, Start&& start) {
    const auto sizes = chunk_sizes(samples, 4096);
    auto parts = run_chunks(sizes.size(), threads, [&](std::size_t k) {
        Rng rng = Rng::stream(seed, k);
        std::vector<double> out(sizes[k]);
        for (auto& s : out) {
            std::size_t u = start(rng);
            double acc = 0.0;
            for (long t = 0; t < n; ++t) {
                acc += values[u];
                u = chain.step(u, rng);
            }
            s = acc;
        }
        return out;
    });
    std::vector<double> all;
    all.reserve(samples);
    for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    return all;
}

inline double clt_variance(const Cocycle& c, const MarkovGibbs& mg) {
    const double v = green_kubo_variance(c, mg).variance;
    if (v <= 1e-6)
        throw DomainError("Green-Kubo variance " + std::to_string(v) +
                          " is degenerate: the cocycle is cohomologous to a constant (see green_kubo_variance)");
    return v;
}

inline CltReport summarize(std::vector<double> sums, long n, double variance) {
    CltReport r;
    r.n = n;
    r.variance = variance;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    CompensatedSum m2;
    for (double& s : sums) {
        s *= scale;
        m2.add(s * s);
    }
    r.empirical_variance = m2.value() / static_cast<double>(sums.size());
    std::sort(sums.begin(), sums.end());
    const GaussianRef g(variance);
    r.ks = ks_statistic(sums, [&](double t) { return g.cdf(t); });
    r.p_value = ks_pvalue(r.ks, sums.size());
    r.normalized = std::move(sums);
    return r;
}

}  // namespace detail

// S_n / sqrt(n) under mu against N(0, rho^2) with the Green-Kubo rho^2.
inline CltReport clt_experiment(const MarkovGibbs& mg, const Cocycle& c, long n, std::size_t samples, std::uint64_t seed,
                                unsigned threads = 1) {
    require(n >= 1 && samples >= 1, "need n >= 1 and at least one sample");
    const double v = detail::clt_variance(c, mg);
    WordChain chain(mg, c.length());
    const auto values = chain.values(c);
    auto sums = detail::birkhoff_samples(chain, values, n, samples, seed, threads,
                                         [&](Rng& rng) { return chain.sample_stationary(rng); });
    return detail::summarize(std::move(sums), n, v);
}

// Same with futures drawn from the conditional measure given `past`.
inline CltReport conditional_clt_experiment(const MarkovGibbs& mg, const Cocycle& c, const Word& past, long n,
                                            std::size_t samples, std::uint64_t seed, unsigned threads = 1) {
    require(c.past_only(), "conditional experiments need a past-only cocycle (apply reduce_to_past)");
    require(n >= 1 && samples >= 1, "need n >= 1 and at least one sample");
    require(mg.matrix().admissible(past), "past is not admissible");
    require(past.size() >= c.length(), "past shorter than the cocycle window");
    const double v = detail::clt_variance(c, mg);
    WordChain chain(mg, c.length());
    const auto values = chain.values(c);
    auto sums = detail::birkhoff_samples(chain, values, n, samples, seed, threads,
                                         [&](Rng& rng) { return chain.state_after(past, rng); });
    return detail::summarize(std::move(sums), n, v);
}

}  // namespace skewlab
