#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "skewlab/cocycle/cocycle.hpp"
#include "skewlab/core/parallel.hpp"
#include "skewlab/fiber/partition.hpp"

namespace skewlab {

// T(x, y) = (sigma x, K_{phi(x)} y) with the product partition
// R = {cylinders [x_0]} x Q; label = x_0 * |Q| + atom.
class SkewSystem {
public:
    SkewSystem(MarkovGibbs gibbs, Cocycle phi, SpecialFlow flow, FiberPartition q)
        : gibbs_(std::move(gibbs)), phi_(std::move(phi)), flow_(std::move(flow)), q_(std::move(q)) {
        phi_.validate(gibbs_.matrix());
        eval_ = CocycleEvaluator(phi_, gibbs_.alphabet());
    }

    const MarkovGibbs& gibbs() const { return gibbs_; }
    const Cocycle& cocycle() const { return phi_; }
    const CocycleEvaluator& evaluator() const { return eval_; }
    const SpecialFlow& flow() const { return flow_; }
    const FiberPartition& partition() const { return q_; }
    std::size_t label_count() const { return gibbs_.alphabet() * q_.size(); }
    std::uint32_t label(Symbol s, const FlowPoint& y) const {
        return static_cast<std::uint32_t>(s * q_.size() + q_.atom(y));
    }

private:
    MarkovGibbs gibbs_;
    Cocycle phi_;
    CocycleEvaluator eval_;
    SpecialFlow flow_;
    FiberPartition q_;
};

struct SkewState {
    Word word;               // x_{-origin} .. x_{size-1-origin}
    std::size_t origin = 0;  // index of coordinate 0
    FlowPoint fiber;
    double birkhoff = 0.0;   // S_n(phi) accumulated by step
    std::size_t steps = 0;
};

inline SkewState make_state(const SkewSystem& sys, Word past, const FlowPoint& y) {
    require(!past.empty(), "past must be nonempty");
    require(sys.gibbs().matrix().admissible(past), "past is not admissible");
    require(sys.flow().contains(y), "fiber point outside the flow space");
    SkewState st;
    st.origin = past.size() - 1;
    st.word = std::move(past);
    st.fiber = y;
    return st;
}

// Appends n symbols drawn from the Gibbs chain given the current word.
inline void extend(const SkewSystem& sys, SkewState& st, std::size_t n, Rng& rng) {
    const MarkovGibbs& mg = sys.gibbs();
    std::size_t u = mg.terminal_block(st.word, rng);
    for (std::size_t i = 0; i < n; ++i) {
        u = mg.step(u, rng);
        st.word.push_back(mg.last_symbol(u));
    }
}

// Makes room for n more steps.
inline void ensure_future(const SkewSystem& sys, SkewState& st, std::size_t n, Rng& rng) {
    const std::size_t need = st.origin + n + static_cast<std::size_t>(std::max(sys.cocycle().hi, 1L)) + 1;
    if (st.word.size() < need) extend(sys, st, need - st.word.size(), rng);
}

inline void step(const SkewSystem& sys, SkewState& st) {
    const long lo = sys.cocycle().lo, hi = sys.cocycle().hi;
    if (static_cast<long>(st.origin) + lo < 0) throw DomainError("past too short for the cocycle window");
    // the new coordinate 0 must exist too
    if (st.origin + static_cast<std::size_t>(std::max(hi, 1L)) >= st.word.size()) throw DomainError("future buffer exhausted");
    const double t = sys.evaluator()(st.word.data() + st.origin);
    st.fiber = sys.flow().flow(st.fiber, t);
    st.birkhoff += t;
    ++st.origin;
    ++st.steps;
}

// Label of the current state; `flagged` is set when the fiber point lies
// within 1e-12 of an atom boundary (the half-open convention decided it).
inline std::uint32_t name(const SkewSystem& sys, const SkewState& st, bool* flagged = nullptr) {
    if (flagged) *flagged = sys.partition().boundary_distance(st.fiber) < 1e-12;
    return sys.label(st.word[st.origin], st.fiber);
}

struct NameSequence {
    std::vector<std::uint32_t> labels;
    std::size_t flagged = 0;
};

// Labels of T^1 .. T^n of the state.
inline NameSequence names(const SkewSystem& sys, SkewState& st, std::size_t n) {
    NameSequence out;
    out.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        step(sys, st);
        bool flag = false;
        out.labels.push_back(name(sys, st, &flag));
        out.flagged += flag ? 1 : 0;
    }
    return out;
}

// Atom of the refined partition truncated at depth m: a past of m symbols
// and a fiber point.
struct Atom {
    Word past;
    FlowPoint y;
};

inline Atom sample_atom(const MarkovGibbs& mg, const SpecialFlow& f, std::size_t depth, Rng& rng) {
    require(depth >= 1, "atom depth must be positive");
    Atom a;
    a.past = mg.sample_stationary(depth, rng);
    a.y = f.sample(rng);
    return a;
}

inline std::vector<NameSequence> conditional_names(const SkewSystem& sys, const Atom& atom, std::size_t n,
                                                   std::size_t samples, std::uint64_t seed, unsigned threads = 1) {
    const auto sizes = chunk_sizes(samples, 256);
    auto parts = run_chunks(sizes.size(), threads, [&](std::size_t k) {
        Rng rng = Rng::stream(seed, k);
        std::vector<NameSequence> out;
        for (std::size_t i = 0; i < sizes[k]; ++i) {
            SkewState st = make_state(sys, atom.past, atom.y);
            ensure_future(sys, st, n, rng);
            out.push_back(names(sys, st, n));
        }
        return out;
    });
    std::vector<NameSequence> all;
    for (auto& p : parts)
        for (auto& s : p) all.push_back(std::move(s));
    return all;
}

// Names of (x, y) drawn from mu x nu; `depth` past symbols make the cocycle
// window available at time 0.
inline std::vector<NameSequence> unconditional_names(const SkewSystem& sys, std::size_t n, std::size_t samples,
                                                     std::uint64_t seed, unsigned threads = 1, std::size_t depth = 8) {
    const auto sizes = chunk_sizes(samples, 256);
    const std::size_t d = std::max<std::size_t>(depth, static_cast<std::size_t>(-sys.cocycle().lo) + 1);
    auto parts = run_chunks(sizes.size(), threads, [&](std::size_t k) {
        Rng rng = Rng::stream(seed, k);
        std::vector<NameSequence> out;
        for (std::size_t i = 0; i < sizes[k]; ++i) {
            const Atom a = sample_atom(sys.gibbs(), sys.flow(), d, rng);
            SkewState st = make_state(sys, a.past, a.y);
            ensure_future(sys, st, n, rng);
            out.push_back(names(sys, st, n));
        }
        return out;
    });
    std::vector<NameSequence> all;
    for (auto& p : parts)
        for (auto& s : p) all.push_back(std::move(s));
    return all;
}

// Largest total variation between the per-time label marginals of two name
// samples (the name alphabet is too large to compare whole names).
inline double collapsed_tv(const std::vector<NameSequence>& a, const std::vector<NameSequence>& b, std::size_t labels) {
    require(!a.empty() && !b.empty(), "empty name sample");
    const std::size_t n = a.front().labels.size();
    double worst = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<double> ha(labels, 0.0), hb(labels, 0.0);
        for (const auto& s : a) ha[s.labels[t]] += 1.0 / static_cast<double>(a.size());
        for (const auto& s : b) hb[s.labels[t]] += 1.0 / static_cast<double>(b.size());
        double tv = 0.0;
        for (std::size_t l = 0; l < labels; ++l) tv += std::fabs(ha[l] - hb[l]);
        worst = std::max(worst, tv / 2.0);
    }
    return worst;
}

// CSV orbit dump: step, symbol, S_n, fiber_x, fiber_s, label.
inline void write_orbit_csv(std::ostream& out, const SkewSystem& sys, SkewState st, std::size_t n) {
    out << "step,symbol,S_n,fiber_x,fiber_s,label\n";
    out.precision(17);
    for (std::size_t i = 0; i <= n; ++i) {
        if (i > 0) step(sys, st);
        out << st.steps << ',' << st.word[st.origin] << ',' << st.birkhoff << ',' << st.fiber.x << ',' << st.fiber.s
            << ',' << name(sys, st) << '\n';
    }
}

// Direct product with a frozen fiber: integer cocycle x_0 -> (+1, -1, +1, ...)
// and the unit-roof flow over the identity, which is 1-periodic. Q has two
// columns and two rows.
inline SkewSystem negative_control(const MarkovGibbs& mg) {
    Cocycle phi = Cocycle::tabulate(mg.matrix(), 0, 0, [](const Word& w) { return w[0] % 2 == 0 ? 1.0 : -1.0; });
    SpecialFlow flow(BaseMap::rotation(0.0), Roof::constant(1.0));
    FiberPartition q = build_generating_partition(flow, 0.5, 0.5);
    return SkewSystem(mg, phi, flow, q);
}

}  // namespace skewlab
