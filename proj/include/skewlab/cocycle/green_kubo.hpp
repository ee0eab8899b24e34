#pragma once

#include <cmath>
#include <vector>

#include "skewlab/cocycle/word_chain.hpp"
#include "skewlab/core/parallel.hpp"

namespace skewlab {

struct VarianceResult {
    double variance = 0.0;
    std::vector<double> terms;  // autocovariances C(0), C(1), ...
    double truncation_error_bound = 0.0;
    std::size_t mixing_block = 1;  // J with Dobrushin coefficient of P^J below 1
    double dobrushin = 0.0;
};

// Dobrushin contraction coefficient 1/2 max_{u,v} sum_w |P_uw - P_vw|.
inline double dobrushin_coefficient(const std::vector<double>& p, std::size_t n) {
    double worst = 0.0;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) {
            double s = 0.0;
            for (std::size_t w = 0; w < n; ++w) s += std::abs(p[u * n + w] - p[v * n + w]);
            worst = std::max(worst, 0.5 * s);
        }
    return worst;
}

// rho^2 = C(0) + 2 sum_{n>=1} C(n), C(n) = E[psi * psi o sigma^n], each term
// exact on the word chain. With v_n = P^n psi (mean zero, so |v_n| <= osc v_n)
// and delta the Dobrushin coefficient of P^J, the remainder after lag N is at
// most 2 ||psi||_1 J osc(v_{N+1}) / (1 - delta).
inline VarianceResult green_kubo_variance(const Cocycle& c, const MarkovGibbs& mg, std::size_t max_lags = 1000000,
                                          double tolerance = 1e-14) {
    if (std::abs(cocycle_mean(c, mg)) > 1e-12) throw DomainError("green_kubo_variance needs a centered cocycle");
    WordChain chain(mg, c.length());
    const std::size_t n = chain.size();
    const std::vector<double> psi = chain.values(c);
    const std::vector<double>& pi = chain.stationary();

    VarianceResult r;
    {
        std::vector<double> p = chain.dense();
        std::vector<double> pj = p;
        std::size_t j = 1;
        for (;;) {
            r.dobrushin = dobrushin_coefficient(pj, n);
            if (r.dobrushin < 0.999) break;
            if (j >= 1024) throw DomainError("chain is not mixing (periodic); variance undefined");
            std::vector<double> sq(n * n, 0.0);
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t k = 0; k < n; ++k)
                    if (pj[a * n + k] != 0.0)
                        for (std::size_t b = 0; b < n; ++b) sq[a * n + b] += pj[a * n + k] * pj[k * n + b];
            pj.swap(sq);
            j *= 2;
        }
        r.mixing_block = j;
    }
    double l1 = 0.0;
    for (std::size_t u = 0; u < n; ++u) l1 += pi[u] * std::abs(psi[u]);

    std::vector<double> v = psi, next(n);
    CompensatedSum total;
    auto covariance = [&](const std::vector<double>& f) {
        CompensatedSum s;
        for (std::size_t u = 0; u < n; ++u) s.add(pi[u] * psi[u] * f[u]);
        return s.value();
    };
    auto apply = [&](const std::vector<double>& f, std::vector<double>& out) {
        for (std::size_t u = 0; u < n; ++u) {
            double s = 0.0;
            for (std::size_t e = chain.begin(u); e < chain.end(u); ++e) s += chain.probability(e) * f[chain.target(e)];
            out[u] = s;
        }
    };
    r.terms.push_back(covariance(v));
    total.add(r.terms.back());
    for (std::size_t lag = 1;; ++lag) {
        apply(v, next);
        v.swap(next);
        double lo = v[0], hi = v[0];
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        // bound on 2 * sum_{k >= lag} |C(k)|, before adding C(lag)
        const double bound = 2.0 * l1 * static_cast<double>(r.mixing_block) * (hi - lo) / (1.0 - r.dobrushin);
        if (bound < tolerance || lag > max_lags) {
            r.truncation_error_bound = bound;
            break;
        }
        r.terms.push_back(covariance(v));
        total.add(2.0 * r.terms.back());
    }
    r.variance = total.value();
    if (r.variance < 0.0 && r.variance > -r.truncation_error_bound - 1e-15) r.variance = 0.0;
    return r;
}

}  // namespace skewlab
