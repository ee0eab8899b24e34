#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <vector>

#include "skewlab/dbar/dbar.hpp"
#include "skewlab/fiber/towers.hpp"

namespace skewlab {

struct VwbOptions {
    std::size_t depth = 8;         // atom = past of `depth` symbols and a fiber point
    std::size_t atoms = 16;
    std::size_t samples = 256;     // coupled pairs per atom
    double epsilon = 0.2;
    double align_horizon = 64.0;   // flow time searched for the fiber alignment
    double align_tol = 0.05;       // fiber distance accepted for the alignment
    double theta_tol = 0.05;       // Birkhoff difference accepted at coalescence
    std::size_t steer_limit = 64;  // steps spent steering before plain coalescence
    bool assignment = true;        // also run the optimal assignment on the coupled samples
};

struct CoupledPair {
    NameSequence conditional;
    NameSequence unconditional;
    std::size_t coalesced_at = 0;  // coordinate from which the futures agree; 0 = never
    double theta = 0.0;            // distance of the final S difference to the nearest alignment time
    bool aligned = false;          // coalesced with |theta| < theta_tol
};

namespace detail {

// Joint law of two successor rows as a transport plan: pairs are filled
// cheapest first, so both marginals are exact.
struct JointDraw {
    std::size_t ea = 0, eb = 0;
};

template <class Cost>
JointDraw couple_rows(const MarkovGibbs& mg, std::size_t ua, std::size_t ub, Cost&& cost, Rng& rng) {
    const std::size_t a0 = mg.successor_begin(ua), a1 = mg.successor_end(ua);
    const std::size_t b0 = mg.successor_begin(ub), b1 = mg.successor_end(ub);
    struct Cell {
        double cost;
        std::size_t ea, eb;
    };
    std::vector<Cell> cells;
    cells.reserve((a1 - a0) * (b1 - b0));
    for (std::size_t ea = a0; ea < a1; ++ea)
        for (std::size_t eb = b0; eb < b1; ++eb) cells.push_back({cost(ea, eb), ea, eb});
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& x, const Cell& y) { return x.cost < y.cost; });
    std::vector<double> ra(a1 - a0), rb(b1 - b0);
    for (std::size_t e = a0; e < a1; ++e) ra[e - a0] = mg.successor_probability(e);
    for (std::size_t e = b0; e < b1; ++e) rb[e - b0] = mg.successor_probability(e);
    const double u = rng.uniform();
    double acc = 0.0;
    JointDraw last{a0, b0};
    for (const Cell& c : cells) {
        double& pa = ra[c.ea - a0];
        double& pb = rb[c.eb - b0];
        const double m = std::min(pa, pb);
        if (m <= 0.0) continue;
        pa -= m;
        pb -= m;
        acc += m;
        last = {c.ea, c.eb};
        if (u < acc) return last;
    }
    return last;  // rounding slack
}

inline bool same_tail(const Word& a, const Word& b, std::size_t len) {
    return std::equal(a.end() - static_cast<long>(len), a.end(), b.end() - static_cast<long>(len));
}

}  // namespace detail

// Couples the conditional process given `atom` with the unconditional one.
// The unconditional start is (past', y') ~ mu x nu. Alignment times are the
// ell in [-H, H] with d(y, K_{-ell} y') < align_tol: a Birkhoff difference
// D = S - S' near one of them makes K_{S'} y' = K_S K_{-D} y' track K_S y.
// Before the base chains coalesce, each joint transition is the cheapest
// transport plan for the distance of D to the nearest alignment time. Once
// that distance is below theta_tol (or after steer_limit steps, or when Q is
// trivial) the chains move together as soon as their states agree. Both
// marginals are exact, so the mean Hamming cost bounds d-bar from above.
inline CoupledPair coupled_names(const SkewSystem& sys, const Atom& atom, std::size_t n, const VwbOptions& opt,
                                 Rng& rng) {
    const MarkovGibbs& mg = sys.gibbs();
    const CocycleEvaluator& ev = sys.evaluator();
    require(sys.cocycle().past_only(), "coupled names need a past-only cocycle (apply reduce_to_past)");
    const std::size_t window = sys.cocycle().length();
    require(atom.past.size() >= window, "atom past shorter than the cocycle window");
    const std::size_t depth = std::max(atom.past.size(), window);
    const Word past2 = mg.sample_stationary(depth, rng);
    const FlowPoint y2 = sys.flow().sample(rng);

    std::vector<double> targets;
    if (sys.partition().size() > 1) targets = alignment_times(sys.flow(), atom.y, y2, opt.align_horizon, opt.align_tol);
    const bool need_align = !targets.empty();
    // distance from a Birkhoff difference to the nearest alignment time
    auto miss = [&](double v) {
        auto it = std::lower_bound(targets.begin(), targets.end(), v);
        double m = HUGE_VAL;
        if (it != targets.end()) m = *it - v;
        if (it != targets.begin()) m = std::min(m, v - *std::prev(it));
        return m;
    };

    Word wa = atom.past, wb = past2;
    const std::size_t pa = wa.size(), pb = wb.size();
    // increment of coordinate 0 enters S_1
    double d = ev(&wa.back()) - ev(&wb.back());
    std::size_t ua = mg.terminal_block(wa, rng), ub = mg.terminal_block(wb, rng);
    const std::size_t memory = std::max(window, mg.block_length());
    const std::size_t horizon = n + 1;  // coordinates 1 .. n+1
    CoupledPair out;
    bool together = false;
    for (std::size_t t = 1; t <= horizon; ++t) {
        if (together) {
            ua = ub = mg.step(ua, rng);
            wa.push_back(mg.last_symbol(ua));
            wb.push_back(mg.last_symbol(ub));
            continue;
        }
        const bool steer = need_align && t <= opt.steer_limit && miss(d) >= opt.theta_tol;
        auto inc = [&](Word& w, std::size_t e) {
            w.push_back(mg.last_symbol(mg.successor(e)));
            const double v = ev(&w.back());
            w.pop_back();
            return v;
        };
        detail::JointDraw j;
        if (steer) {
            std::vector<double> ca, cb;
            for (std::size_t e = mg.successor_begin(ua); e < mg.successor_end(ua); ++e) ca.push_back(inc(wa, e));
            for (std::size_t e = mg.successor_begin(ub); e < mg.successor_end(ub); ++e) cb.push_back(inc(wb, e));
            const std::size_t a0 = mg.successor_begin(ua), b0 = mg.successor_begin(ub);
            j = detail::couple_rows(
                mg, ua, ub, [&](std::size_t ea, std::size_t eb) { return miss(d + ca[ea - a0] - cb[eb - b0]); },
                rng);
        } else {
            j = detail::couple_rows(
                mg, ua, ub,
                [&](std::size_t ea, std::size_t eb) {
                    return mg.last_symbol(mg.successor(ea)) == mg.last_symbol(mg.successor(eb)) ? 0.0 : 1.0;
                },
                rng);
        }
        ua = mg.successor(j.ea);
        ub = mg.successor(j.eb);
        wa.push_back(mg.last_symbol(ua));
        wb.push_back(mg.last_symbol(ub));
        d += ev(&wa.back()) - ev(&wb.back());
        const bool settled = !need_align || t > opt.steer_limit || miss(d) < opt.theta_tol;
        if (settled && ua == ub && detail::same_tail(wa, wb, memory)) {
            together = true;
            out.coalesced_at = t;
            out.theta = need_align ? miss(d) : 0.0;
            out.aligned = need_align && miss(d) < opt.theta_tol;
        }
    }
    SkewState sa = make_state(sys, Word(wa.begin(), wa.begin() + static_cast<long>(pa)), atom.y);
    sa.word = std::move(wa);
    SkewState sb = make_state(sys, Word(wb.begin(), wb.begin() + static_cast<long>(pb)), y2);
    sb.word = std::move(wb);
    out.conditional = names(sys, sa, n);
    out.unconditional = names(sys, sb, n);
    return out;
}

struct VwbAtomReport {
    Atom atom;
    DbarResult coupling;    // mean cost of the explicit coupling (upper-bound estimator)
    DbarResult assignment;  // optimal assignment between the two coupled samples
    double dbar = 0.0;      // the per-atom value used for the verdict (coupling)
    double mean_coalescence = 0.0;
    double never_coalesced = 0.0;
    double aligned = 0.0;
};

struct VwbReport {
    std::size_t n = 0, depth = 0;
    double epsilon = 0.0;
    std::vector<VwbAtomReport> atoms;
    double median = 0.0;
    double bad_fraction = 0.0;  // atoms with d-bar >= epsilon
    bool pass = false;          // bad atoms carry mass < epsilon
    double frozen_bound = 0.0;  // 1 - max_j nu(Q_j)
};

inline double median_of(std::vector<double> v) {
    require(!v.empty(), "median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

// Per-atom d-bar between {T^-i R | r} and {T^-i R}, i = 1..n, over atoms r
// sampled from mu x nu. Verdict: atoms with d-bar >= epsilon have empirical
// mass < epsilon. Nothing here certifies the quantifier over all n.
inline VwbReport vwb_experiment(const SkewSystem& sys, std::size_t n, const VwbOptions& opt, std::uint64_t seed,
                                unsigned threads = 1) {
    require(n >= 1 && opt.atoms >= 1 && opt.samples >= 1, "need n, atoms and samples positive");
    require(opt.epsilon > 0.0 && opt.epsilon < 1.0, "epsilon must lie in (0, 1)");
    const std::size_t depth = std::max(opt.depth, sys.cocycle().length());
    VwbReport rep;
    rep.n = n;
    rep.depth = depth;
    rep.epsilon = opt.epsilon;
    const auto& m = sys.partition().measures();
    rep.frozen_bound = 1.0 - *std::max_element(m.begin(), m.end());
    rep.atoms = run_chunks(opt.atoms, threads, [&](std::size_t k) {
        Rng rng = Rng::stream(seed, k);
        VwbAtomReport a;
        a.atom = sample_atom(sys.gibbs(), sys.flow(), depth, rng);
        EmpiricalNames ca, ub;
        double coal = 0.0;
        std::size_t never = 0, aligned = 0;
        for (std::size_t i = 0; i < opt.samples; ++i) {
            CoupledPair p = coupled_names(sys, a.atom, n, opt, rng);
            if (p.coalesced_at == 0) ++never;
            coal += static_cast<double>(p.coalesced_at == 0 ? n + 1 : p.coalesced_at);
            aligned += p.aligned ? 1 : 0;
            ca.push_back(std::move(p.conditional));
            ub.push_back(std::move(p.unconditional));
        }
        a.coupling = paired_cost(ca, ub);
        if (opt.assignment) a.assignment = dbar_names(ca, ub);
        a.dbar = a.coupling.value;
        a.mean_coalescence = coal / static_cast<double>(opt.samples);
        a.never_coalesced = static_cast<double>(never) / static_cast<double>(opt.samples);
        a.aligned = static_cast<double>(aligned) / static_cast<double>(opt.samples);
        return a;
    });
    std::vector<double> v;
    std::size_t bad = 0;
    for (const auto& a : rep.atoms) {
        v.push_back(a.dbar);
        bad += a.dbar >= opt.epsilon ? 1 : 0;
    }
    rep.median = median_of(v);
    rep.bad_fraction = static_cast<double>(bad) / static_cast<double>(rep.atoms.size());
    rep.pass = rep.bad_fraction < opt.epsilon;
    return rep;
}

}  // namespace skewlab
