#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "skewlab/core/parallel.hpp"
#include "skewlab/fiber/continued_fraction.hpp"
#include "skewlab/fiber/special_flow.hpp"

namespace skewlab {

// Tower over B = [0, base_length) of height h, levels K_t(B x {0}), t < h.
struct TowerSpec {
    std::size_t level = 0;
    long long q = 0;               // base return time
    double base_length = 0.0;
    double height = 0.0;
    double return_overlap = 0.0;   // fraction of B mapped back into B by K_h
    double max_diam = 0.0;         // sup over levels of the level diameter
};

namespace detail {

// Whether K_h(x, 0) lands back on B x {0}, allowing the roof identification.
inline bool returns_to_base(const SpecialFlow& f, double x, double h, double base_length, double tol) {
    FlowPoint p = f.flow({x, 0.0}, h);
    if (p.s > f.roof()(p.x) - tol) {
        p.x = f.base().apply(p.x);
        p.s = 0.0;
    }
    return p.s <= tol && p.x < base_length;
}

inline std::vector<double> grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    return g;
}

}  // namespace detail

// One tower per continued-fraction level n: B_n = [0, ||q_{n-1} alpha||),
// the largest interval at 0 whose first q_n images are disjoint, and
// h_n = S_{q_n}(roof)(0).
inline std::vector<TowerSpec> rigidity_towers(const SpecialFlow& f, std::size_t count, std::size_t grid_points = 2048) {
    require(f.base().is_rotation(), "rigidity towers need a rotation base");
    const ContinuedFraction cf = continued_fraction(f.base().alpha(), count + 1);
    std::vector<TowerSpec> out;
    for (std::size_t n = 1; n <= count; ++n) {
        TowerSpec t;
        t.level = n;
        t.q = cf.denominators[n];
        t.base_length = cf.errors[n - 1];
        t.height = f.roof_sum(0.0, t.q);
        const auto xs = detail::grid(0.0, t.base_length, grid_points);

        // level diameters: base spread of T^j B and spread of the crossing times S_j(roof)
        std::vector<double> base(xs), heights(xs.size(), 0.0);
        double diam = 0.0;
        // rotation under a constant roof: every level is a translate of B
        if (f.roof().is_constant()) diam = t.base_length;
        for (long long j = 0; j < t.q && !f.roof().is_constant(); ++j) {
            double lo_h = HUGE_VAL, hi_h = -HUGE_VAL, spread = 0.0;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                spread = std::max(spread, circle_distance(base[i], base[0]));
                lo_h = std::min(lo_h, heights[i]);
                hi_h = std::max(hi_h, heights[i]);
            }
            // grid midpoints miss half a cell on either side
            spread += t.base_length / static_cast<double>(grid_points);
            diam = std::max({diam, spread, hi_h - lo_h});
            for (std::size_t i = 0; i < xs.size(); ++i) {
                heights[i] += f.roof()(base[i]);
                base[i] = f.base().apply(base[i]);
            }
        }
        t.max_diam = diam;

        std::size_t back = 0;
        for (double x : xs) back += detail::returns_to_base(f, x, t.height, t.base_length, std::max(1e-9, diam)) ? 1 : 0;
        t.return_overlap = static_cast<double>(back) / static_cast<double>(xs.size());
        out.push_back(t);
    }
    return out;
}

struct WitnessLevel {
    TowerSpec tower;
    long long repeats = 0;   // M_i
    double a = 0.0;          // 2 h_i
    double b = 0.0;          // M_i h_i / 2
    double delta = 0.0;      // half the largest level diameter
    double kept_fraction = 0.0;  // |B~| / |B|
};

// Levels of a quasi-ellipticity witness plus the Z-margin used by (B), (C).
struct QuasiEllipticWitness {
    std::vector<WitnessLevel> levels;
    double margin = 0.0;  // Z = {margin < s < roof(x) - margin}
    std::vector<std::string> warnings;
};

// x in B~ = intersection over i <= M of K_{-i h}(B): x returns to B after each of M tower periods.
inline bool in_kept_base(const SpecialFlow& f, const WitnessLevel& w, double x) {
    if (x >= w.tower.base_length) return false;
    const double tol = std::max(1e-9, w.tower.max_diam);
    for (long long i = 0; i < w.repeats; ++i) {
        if (!detail::returns_to_base(f, x, w.tower.height, w.tower.base_length, tol)) return false;
        FlowPoint p = f.flow({x, 0.0}, w.tower.height);
        x = p.s > f.roof()(p.x) - tol ? f.base().apply(p.x) : p.x;
    }
    return true;
}

// Membership in N_i: a point of the tower over B~ trimmed by delta from base and roof.
inline bool in_witness_set(const SpecialFlow& f, const WitnessLevel& w, const FlowPoint& p) {
    if (p.s < w.delta || p.s > f.roof()(p.x) - w.delta) return false;
    double tau = p.s, x = p.x;
    while (tau < w.tower.height) {
        if (in_kept_base(f, w, x)) return true;
        x = f.base().apply_inverse(x);
        tau += f.roof()(x);
    }
    return false;
}

inline QuasiEllipticWitness witness_from_towers(const SpecialFlow& f, const std::vector<TowerSpec>& towers,
                                                const std::vector<long long>& repeats, double overlap_tolerance,
                                                double margin) {
    require(repeats.size() == towers.size(), "one repetition count per tower");
    require(margin > 0.0, "Z margin must be positive");
    QuasiEllipticWitness w;
    w.margin = margin;
    for (std::size_t i = 0; i < towers.size(); ++i) {
        const TowerSpec& t = towers[i];
        if (t.return_overlap < 1.0 - overlap_tolerance) {
            w.warnings.push_back("level " + std::to_string(t.level) + " skipped: return overlap " +
                                 std::to_string(t.return_overlap) + " below tolerance");
            continue;
        }
        require(repeats[i] >= 1, "repetition counts must be positive");
        WitnessLevel l;
        l.tower = t;
        l.repeats = repeats[i];
        l.a = 2.0 * t.height;
        l.b = static_cast<double>(repeats[i]) * t.height / 2.0;
        l.delta = t.max_diam / 2.0;
        std::size_t kept = 0;
        const auto xs = detail::grid(0.0, t.base_length, 1024);
        for (double x : xs) kept += in_kept_base(f, l, x) ? 1 : 0;
        l.kept_fraction = static_cast<double>(kept) / static_cast<double>(xs.size());
        if (kept == 0) {
            w.warnings.push_back("level " + std::to_string(t.level) + " skipped: no base point survives the repetitions");
            continue;
        }
        w.levels.push_back(l);
    }
    return w;
}

inline FlowPoint sample_witness_point(const SpecialFlow& f, const WitnessLevel& w, Rng& rng) {
    for (long tries = 0; tries < 100000000; ++tries) {
        const FlowPoint p = f.sample(rng);
        if (in_witness_set(f, w, p)) return p;
    }
    throw ResourceError("witness set too small to sample");
}

struct Alignment {
    double time = 0.0;
    double distance = HUGE_VAL;
};

// min over t in [0, t_max] of d(p, K_{-t} q), exactly: walking q backwards,
// each fiber over T^{-j} q.x is visited once and the best height is s_p.
inline Alignment best_alignment(const SpecialFlow& f, const FlowPoint& p, const FlowPoint& q, double t_max) {
    Alignment best;
    double x = q.x;
    double top = q.s;  // time at which the backward orbit leaves the current fiber through its base
    double enter = 0.0;
    for (;;) {
        // on fiber over x, height v corresponds to t = top - v, t in [enter, top]
        const double v_lo = top - std::min(t_max, top);
        const double v_hi = top - enter;
        const double v = std::clamp(p.s, v_lo, v_hi);
        const double d = std::max(circle_distance(p.x, x), std::fabs(v - p.s));
        if (d < best.distance) best = {top - v, d};
        if (top >= t_max) break;
        x = f.base().apply_inverse(x);
        enter = top;
        top += f.roof()(x);
    }
    return best;
}

// Walking q backwards, the first fiber on which d(p, K_{-t} q) < tol for
// some t in [0, t_max], at its closest height; the best alignment when no
// fiber qualifies.
inline Alignment first_alignment(const SpecialFlow& f, const FlowPoint& p, const FlowPoint& q, double t_max,
                                 double tol) {
    Alignment best;
    double x = q.x;
    double top = q.s;
    double enter = 0.0;
    for (;;) {
        const double v_lo = top - std::min(t_max, top);
        const double v_hi = top - enter;
        const double v = std::clamp(p.s, v_lo, v_hi);
        const double d = std::max(circle_distance(p.x, x), std::fabs(v - p.s));
        if (d < tol) return {top - v, d};
        if (d < best.distance) best = {top - v, d};
        if (top >= t_max) break;
        x = f.base().apply_inverse(x);
        enter = top;
        top += f.roof()(x);
    }
    return best;
}

// Every t in [-t_max, t_max] with d(p, K_{-t} q) < tol at exact vertical
// alignment (one per fiber visited), in increasing order.
inline std::vector<double> alignment_times(const SpecialFlow& f, const FlowPoint& p, const FlowPoint& q,
                                           double t_max, double tol) {
    std::vector<double> out;
    // t >= 0: K_{-t} q walks q backwards
    double x = q.x, top = q.s;
    for (;;) {
        const double t = top - p.s;
        if (t >= 0.0 && t <= t_max && p.s < f.roof()(x) && circle_distance(p.x, x) < tol) out.push_back(t);
        if (top >= t_max + p.s) break;
        x = f.base().apply_inverse(x);
        top += f.roof()(x);
    }
    // t < 0: K_{|t|} q walks forward; height p.s on the fiber over x is reached at tau
    x = q.x;
    double base = -q.s;  // forward time at which the current fiber starts
    for (;;) {
        const double tau = base + p.s;
        if (tau > 0.0 && tau <= t_max && p.s < f.roof()(x) && circle_distance(p.x, x) < tol) out.push_back(-tau);
        base += f.roof()(x);
        if (base > t_max) break;
        x = f.base().apply(x);
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct QuasiEllipticReport {
    std::size_t pairs = 0;
    double pass_a = 0.0, pass_b = 0.0, pass_c = 0.0;
    double worst_a = 0.0;  // largest best-alignment distance seen
    double worst_c = 0.0;
    double measure_n = 0.0;  // Monte Carlo estimate of nu(N_i)
};

// Checks (A) tower-like alignment within delta for t in [0, a], (B) orbit
// continuity on Z for |t| < xi = min(margin, eps), and (C) slow divergence
// along [0, b] at visits of K_t y_1 to Z.
inline QuasiEllipticReport verify_quasi_elliptic(const SpecialFlow& f, const WitnessLevel& w, double margin,
                                                 std::size_t pairs, double eps, std::uint64_t seed,
                                                 unsigned threads = 1, std::size_t c_checks = 200) {
    struct Tally {
        std::size_t a = 0, b = 0, c = 0, n = 0;
        double worst_a = 0.0, worst_c = 0.0;
    };
    const std::size_t chunk = 64;
    const auto sizes = chunk_sizes(pairs, chunk);
    const double xi = std::min(margin, eps);
    auto tallies = run_chunks(sizes.size(), threads, [&](std::size_t k) {
        Rng rng = Rng::stream(seed, k);
        Tally t;
        for (std::size_t i = 0; i < sizes[k]; ++i) {
            const FlowPoint y1 = sample_witness_point(f, w, rng);
            const FlowPoint y2 = sample_witness_point(f, w, rng);
            const Alignment al = best_alignment(f, y1, y2, w.a);
            t.worst_a = std::max(t.worst_a, al.distance);
            if (al.distance < w.delta) ++t.a;

            FlowPoint z = f.sample(rng);
            while (z.s <= margin || z.s >= f.roof()(z.x) - margin) z = f.sample(rng);
            const double dt = xi * (2.0 * rng.uniform() - 1.0);
            if (flow_distance(f.flow(z, dt), z) < eps) ++t.b;

            bool ok = true;
            FlowPoint u = y1, v = f.flow(y2, -al.time);
            const double step = w.b / static_cast<double>(c_checks);
            for (std::size_t s = 0; s <= c_checks; ++s) {
                if (u.s > margin && u.s < f.roof()(u.x) - margin) {
                    const double d = flow_distance(u, v);
                    t.worst_c = std::max(t.worst_c, d);
                    if (d >= eps) ok = false;
                }
                u = f.flow(u, step);
                v = f.flow(v, step);
            }
            if (ok) ++t.c;
            ++t.n;
        }
        return t;
    });
    QuasiEllipticReport r;
    std::size_t a = 0, b = 0, c = 0;
    for (const auto& t : tallies) {
        a += t.a;
        b += t.b;
        c += t.c;
        r.pairs += t.n;
        r.worst_a = std::max(r.worst_a, t.worst_a);
        r.worst_c = std::max(r.worst_c, t.worst_c);
    }
    const double n = static_cast<double>(std::max<std::size_t>(r.pairs, 1));
    r.pass_a = static_cast<double>(a) / n;
    r.pass_b = static_cast<double>(b) / n;
    r.pass_c = static_cast<double>(c) / n;
    Rng rng = Rng::stream(seed, sizes.size());
    std::size_t hits = 0;
    const std::size_t probes = 20000;
    for (std::size_t i = 0; i < probes; ++i) hits += in_witness_set(f, w, f.sample(rng)) ? 1 : 0;
    r.measure_n = static_cast<double>(hits) / static_cast<double>(probes);
    return r;
}

}  // namespace skewlab
