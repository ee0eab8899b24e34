#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "skewlab/fiber/special_flow.hpp"
#include "skewlab/stats/binomial.hpp"

namespace skewlab {

// Columns over base intervals, each cut into rectangles of height eps up to
// the last full one below the roof; the rest of the column up to the graph
// is one extra atom. Atoms of column i are numbered offset(i) + k.
class FiberPartition {
public:
    FiberPartition(const SpecialFlow& f, std::vector<double> cuts, double eps) : cuts_(std::move(cuts)), eps_(eps) {
        const std::size_t n = cuts_.size();
        const double mean = f.mean_roof();
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = cuts_[i], hi = i + 1 < n ? cuts_[i + 1] : 1.0;
            const double low_roof = f.roof().min_on(lo, hi);
            // a top atom of zero height would be empty; fold it into the last rectangle
            long full = static_cast<long>(std::floor(low_roof / eps * (1.0 + 1e-12)));
            if (std::fabs(full * eps - low_roof) <= 1e-12 * low_roof) --full;
            full = std::max(full, 0L);
            rows_.push_back(static_cast<std::size_t>(full));
            tops_.push_back(f.roof().max_on(lo, hi));
            offsets_.push_back(count_);
            count_ += static_cast<std::size_t>(full) + 1;
            const double width = hi - lo;
            for (long k = 0; k < full; ++k) measures_.push_back(width * eps / mean);
            measures_.push_back((f.roof().integral_on(lo, hi) - static_cast<double>(full) * eps * width) / mean);
        }
    }

    std::size_t size() const { return count_; }
    std::size_t columns() const { return cuts_.size(); }
    double eps() const { return eps_; }
    const std::vector<double>& cuts() const { return cuts_; }
    double atom_measure(std::size_t i) const { return measures_[i]; }
    const std::vector<double>& measures() const { return measures_; }

    std::size_t column(double x) const {
        auto it = std::upper_bound(cuts_.begin(), cuts_.end(), x);
        return it == cuts_.begin() ? 0 : static_cast<std::size_t>(it - cuts_.begin() - 1);
    }

    // Half-open convention: [k eps, (k+1) eps) and [lo, hi).
    std::size_t atom(const FlowPoint& p) const {
        const std::size_t c = column(p.x);
        const std::size_t k = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(p.s / eps_))), rows_[c]);
        return offsets_[c] + k;
    }

    // Sup-metric distance from p to the union of atom boundaries inside the flow space.
    double boundary_distance(const FlowPoint& p) const {
        const std::size_t c = column(p.x);
        const std::size_t n = cuts_.size();
        double d = HUGE_VAL;
        if (n > 1 || cuts_[0] != 0.0) {
            const double lo = cuts_[c], hi = c + 1 < n ? cuts_[c + 1] : 1.0;
            const double left_top = std::max(tops_[c], tops_[(c + n - 1) % n]);
            const double right_top = std::max(tops_[c], tops_[(c + 1) % n]);
            d = std::min(std::max(circle_distance(p.x, lo), std::max(0.0, p.s - left_top)),
                         std::max(circle_distance(p.x, hi), std::max(0.0, p.s - right_top)));
        }
        if (rows_[c] > 0) {
            const double k = std::clamp(std::round(p.s / eps_), 1.0, static_cast<double>(rows_[c]));
            d = std::min(d, std::fabs(p.s - k * eps_));
        }
        return d;
    }

private:
    std::vector<double> cuts_;
    double eps_;
    std::vector<std::size_t> rows_, offsets_;
    std::vector<double> tops_, measures_;
    std::size_t count_ = 0;
};

// Columns of width at most base_width refining the continuity intervals of
// the base map and the roof.
inline FiberPartition build_generating_partition(const SpecialFlow& f, double eps, double base_width = 0.0) {
    require(eps > 0.0, "partition height must be positive");
    require(eps <= f.roof().min_value(), "partition height exceeds the minimum of the roof");
    if (base_width <= 0.0) base_width = eps;
    std::vector<double> marks = f.base().cuts();
    for (const auto& p : f.roof().pieces()) marks.push_back(p.lo);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    std::vector<double> cuts;
    for (std::size_t i = 0; i < marks.size(); ++i) {
        const double lo = marks[i], hi = i + 1 < marks.size() ? marks[i + 1] : 1.0;
        const auto pieces = static_cast<std::size_t>(std::ceil((hi - lo) / base_width - 1e-12));
        for (std::size_t k = 0; k < pieces; ++k) cuts.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(pieces));
    }
    return FiberPartition(f, std::move(cuts), eps);
}

// nu(V_eta boundary(Q)) by sampling the normalized flow measure.
inline MassEstimate boundary_mass(const SpecialFlow& f, const FiberPartition& q, double eta, std::size_t samples, Rng& rng) {
    require(eta > 0.0, "eta must be positive");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples; ++i) hits += q.boundary_distance(f.sample(rng)) < eta ? 1 : 0;
    return wilson_interval(hits, samples);
}

struct ErgodicTimeReport {
    double t0 = 0.0;
    double discrepancy = 0.0;  // max over test rectangles of |orbit frequency - measure|
    double threshold = 0.0;    // 3 sigma of the worst rectangle
    bool flagged = false;
    std::optional<double> alternative;
};

namespace detail {

inline ErgodicTimeReport equidistribution(const SpecialFlow& f, double t0, std::size_t iterates) {
    // 5 x 4 grid of rectangles under the lowest roof level
    const double h = f.roof().min_value();
    std::vector<std::size_t> counts(20, 0);
    FlowPoint p{0.1234567, 0.3141592 * h};
    for (std::size_t n = 0; n < iterates; ++n) {
        p = f.flow(p, t0);
        const auto col = static_cast<std::size_t>(p.x * 5.0);
        const auto row = static_cast<std::size_t>(p.s / h * 4.0);
        if (row < 4 && col < 5) ++counts[row * 5 + col];
    }
    ErgodicTimeReport r;
    r.t0 = t0;
    const double nn = static_cast<double>(iterates);
    for (std::size_t k = 0; k < 20; ++k) {
        const double mass = 0.2 * h / 4.0 / f.mean_roof();
        const double freq = static_cast<double>(counts[k]) / nn;
        r.discrepancy = std::max(r.discrepancy, std::fabs(freq - mass));
        r.threshold = std::max(r.threshold, 3.0 * std::sqrt(mass * (1.0 - mass) / nn));
    }
    r.flagged = r.discrepancy > r.threshold;
    return r;
}

}  // namespace detail

// Default t0 = mean_roof (sqrt 2 - 1); if that fails the equidistribution
// check, other quadratic irrational multiples are tried.
inline ErgodicTimeReport pick_ergodic_time(const SpecialFlow& f, std::optional<double> t0 = std::nullopt,
                                           std::size_t iterates = 1000000) {
    const double t = t0.value_or(f.mean_roof() * (std::sqrt(2.0) - 1.0));
    if (t == 0.0) throw DomainError("t0 = 0 gives the identity, which is never ergodic");
    ErgodicTimeReport r = detail::equidistribution(f, t, iterates);
    if (r.flagged) {
        for (double m : {(std::sqrt(3.0) - 1.0) / 2.0, std::sqrt(7.0) - 2.0, (std::sqrt(11.0) - 3.0)}) {
            const ErgodicTimeReport alt = detail::equidistribution(f, f.mean_roof() * m, iterates);
            if (!alt.flagged) {
                r.alternative = alt.t0;
                break;
            }
        }
    }
    return r;
}

// First n <= horizon at which K_{t0}^n p and K_{t0}^n q fall in different atoms.
inline std::optional<long> separation_time(const SpecialFlow& f, const FiberPartition& Q, double t0, FlowPoint p,
                                           FlowPoint q, long horizon) {
    for (long n = 0; n <= horizon; ++n) {
        if (Q.atom(p) != Q.atom(q)) return n;
        p = f.flow(p, t0);
        q = f.flow(q, t0);
    }
    return std::nullopt;
}

}  // namespace skewlab
