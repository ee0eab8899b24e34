#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "skewlab/core/parallel.hpp"
#include "skewlab/core/rng.hpp"
#include "skewlab/dbar/assignment.hpp"
#include "skewlab/skew/skew.hpp"
#include "skewlab/stats/binomial.hpp"

namespace skewlab {

enum class DbarMethod { exact_assignment, greedy, coupling };

inline const char* to_string(DbarMethod m) {
    switch (m) {
        case DbarMethod::exact_assignment: return "exact_assignment";
        case DbarMethod::greedy: return "greedy";
        case DbarMethod::coupling: return "coupling";
    }
    return "?";
}

// Partition d-bar is the unnormalized sum over atoms (in [0, 2]); name d-bar
// is the per-coordinate Hamming cost (in [0, 1]).
struct DbarResult {
    double value = 0.0;
    double ci_low = 0.0, ci_high = 0.0;
    DbarMethod method = DbarMethod::exact_assignment;
    std::size_t coupling_size = 0;
};

using EmpiricalNames = std::vector<NameSequence>;

inline constexpr std::size_t kAssignmentCap = 512;

inline std::size_t hamming(const NameSequence& a, const NameSequence& b) {
    std::size_t d = 0;
    for (std::size_t t = 0; t < a.labels.size(); ++t) d += a.labels[t] != b.labels[t] ? 1 : 0;
    return d;
}

inline void check_names(const EmpiricalNames& a, const EmpiricalNames& b) {
    require(!a.empty() && !b.empty(), "empty name sample");
    require(a.size() == b.size(), "name samples must have equal sizes for a perfect matching");
    const std::size_t n = a.front().labels.size();
    require(n > 0, "names must be nonempty");
    for (const auto& s : a) require(s.labels.size() == n, "names must have equal length");
    for (const auto& s : b) require(s.labels.size() == n, "names must have equal length");
}

// d-bar between the empirical name distributions: minimal average normalized
// Hamming cost over perfect matchings. Exact up to `cap` names, greedy above.
inline DbarResult dbar_names(const EmpiricalNames& a, const EmpiricalNames& b, std::size_t cap = kAssignmentCap) {
    check_names(a, b);
    const std::size_t k = a.size(), n = a.front().labels.size();
    std::vector<double> cost(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) cost[i * k + j] = static_cast<double>(hamming(a[i], b[j]));
    DbarResult r;
    r.coupling_size = k;
    r.method = k <= cap ? DbarMethod::exact_assignment : DbarMethod::greedy;
    const Assignment m = k <= cap ? hungarian(cost, k) : greedy_assignment(cost, k);
    r.value = m.cost / static_cast<double>(k * n);
    r.ci_low = r.ci_high = r.value;
    return r;
}

// Average normalized Hamming cost of the pairing a[i] <-> b[i], with a normal
// confidence interval over pairs.
inline DbarResult paired_cost(const EmpiricalNames& a, const EmpiricalNames& b) {
    check_names(a, b);
    const std::size_t k = a.size(), n = a.front().labels.size();
    CompensatedSum s, s2;
    for (std::size_t i = 0; i < k; ++i) {
        const double c = static_cast<double>(hamming(a[i], b[i])) / static_cast<double>(n);
        s.add(c);
        s2.add(c * c);
    }
    DbarResult r;
    r.method = DbarMethod::coupling;
    r.coupling_size = k;
    r.value = s.value() / static_cast<double>(k);
    const double var = std::max(0.0, s2.value() / static_cast<double>(k) - r.value * r.value);
    const double half = 1.96 * std::sqrt(var / static_cast<double>(k));
    r.ci_low = std::max(0.0, r.value - half);
    r.ci_high = std::min(1.0, r.value + half);
    return r;
}

// An indexed partition of a space of points of type P.
template <class P>
struct IndexedPartition {
    std::size_t count = 0;
    std::function<std::size_t(const P&)> index;
};

// Monte Carlo sum_i mu(P_i sym-diff Q_i) = 2 mu{P-index != Q-index}.
template <class P, class Sampler>
DbarResult dbar_partitions(const IndexedPartition<P>& p, const IndexedPartition<P>& q, Sampler&& sample,
                           std::size_t samples, std::uint64_t seed) {
    if (p.count != q.count) throw DomainError("index mismatch: partitions have different index sets");
    require(samples > 0, "need at least one sample");
    Rng rng(seed);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < samples; ++i) {
        const P x = sample(rng);
        differ += p.index(x) != q.index(x) ? 1 : 0;
    }
    const MassEstimate m = wilson_interval(differ, samples);
    DbarResult r;
    r.value = 2.0 * m.estimate;
    r.ci_low = 2.0 * m.ci_low;
    r.ci_high = 2.0 * m.ci_high;
    r.method = DbarMethod::coupling;
    r.coupling_size = samples;
    return r;
}

// (1/n) sum_i d-bar(xi_i, eta_i) for two partition sequences.
template <class P, class Sampler>
DbarResult dbar_sequences(const std::vector<IndexedPartition<P>>& xi, const std::vector<IndexedPartition<P>>& eta,
                          Sampler&& sample, std::size_t samples, std::uint64_t seed) {
    require(!xi.empty() && xi.size() == eta.size(), "partition sequences must be nonempty and of equal length");
    DbarResult r;
    r.method = DbarMethod::coupling;
    r.coupling_size = samples;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        const DbarResult d = dbar_partitions(xi[i], eta[i], sample, samples, seed + i);
        r.value += d.value / static_cast<double>(xi.size());
        r.ci_low += d.ci_low / static_cast<double>(xi.size());
        r.ci_high += d.ci_high / static_cast<double>(xi.size());
    }
    return r;
}

// A test set A with mass mu(A) and the mass nu(theta A) of its image.
struct MassPair {
    double source = 0.0;
    double image = 0.0;
};

struct EpsilonMpReport {
    double epsilon_achieved = 0.0;
    double excluded_mass = 0.0;
    std::size_t tested_sets = 0;
    std::size_t excluded_sets = 0;
    bool pass = false;
};

// Smallest e for which some exceptional family E' of mass < e leaves every
// other set with |nu(theta A)/mu(A) - 1| < e. Excluding the worst k sets costs
// e_k = max(mass of those k, (k+1)-th deviation); the report keeps the best k.
inline EpsilonMpReport epsilon_mp_check(const std::vector<MassPair>& sets, double eps) {
    require(eps > 0.0, "epsilon must be positive");
    EpsilonMpReport r;
    r.tested_sets = sets.size();
    std::vector<std::pair<double, double>> dev;  // (deviation, mass)
    for (const auto& s : sets) {
        require(s.source > 0.0 && s.image >= 0.0, "test sets need positive source mass");
        dev.emplace_back(std::fabs(s.image / s.source - 1.0), s.source);
    }
    std::sort(dev.begin(), dev.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    double mass = 0.0;
    r.epsilon_achieved = HUGE_VAL;
    for (std::size_t k = 0; k <= dev.size(); ++k) {
        const double next = k < dev.size() ? dev[k].first : 0.0;
        const double e = std::max(mass, next);
        if (e < r.epsilon_achieved) {
            r.epsilon_achieved = e;
            r.excluded_mass = mass;
            r.excluded_sets = k;
        }
        if (k < dev.size()) mass += dev[k].second;
    }
    r.pass = r.epsilon_achieved < eps;
    return r;
}

// Two name samples of Bernoulli(p) and Bernoulli(q) coordinates drawn from one
// uniform per coordinate, so both marginals are exact and pair i is coupled
// monotonically.
inline std::pair<EmpiricalNames, EmpiricalNames> coupled_bernoulli_names(double p, double q, std::size_t n,
                                                                        std::size_t count, std::uint64_t seed) {
    require(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0, "probabilities must lie in [0, 1]");
    Rng rng(seed);
    EmpiricalNames a(count), b(count);
    for (std::size_t i = 0; i < count; ++i) {
        a[i].labels.resize(n);
        b[i].labels.resize(n);
        for (std::size_t t = 0; t < n; ++t) {
            const double u = rng.uniform();
            a[i].labels[t] = u < p ? 1u : 0u;
            b[i].labels[t] = u < q ? 1u : 0u;
        }
    }
    return {std::move(a), std::move(b)};
}

inline EmpiricalNames bernoulli_names(double p, std::size_t n, std::size_t count, Rng& rng) {
    EmpiricalNames a(count);
    for (auto& s : a) {
        s.labels.resize(n);
        for (auto& l : s.labels) l = rng.uniform() < p ? 1u : 0u;
    }
    return a;
}

}  // namespace skewlab
