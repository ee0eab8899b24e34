#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "skewlab/cocycle/green_kubo.hpp"
#include "skewlab/cocycle/word_chain.hpp"
#include "skewlab/core/parallel.hpp"
#include "skewlab/fiber/towers.hpp"
#include "skewlab/skew/skew.hpp"
#include "skewlab/stats/gaussian.hpp"

namespace skewlab {

// Matching of two unstable leaves r = (x^-, z) and r' = (x'^-, z') of the
// skew product. Futures are bucketed by the Birkhoff sum S_{n2} and by the
// block of symbols around coordinate n2; a bucket of r is paired with the
// bucket of r' shifted by the fiber alignment time ell, and matched futures
// share every symbol after the block.
struct MatchOptions {
    double epsilon = 0.09;
    double a = 2.0;            // exponent in 10 eps^a <= c, xi >= eps^{3a}, k0 <= eps^{-a}
    double c = 0.09;           // boundary margin of Q
    double xi = 0.05;          // theta bound is xi / 20
    long long n1 = 100;        // smallest admissible n2
    double hat_ratio = 20.0;   // n_hat >= hat_ratio * n2
    double ratio_bound = 0.1;  // a_i / b_i bound
    double agreement = 0.8;    // a pair is good when >= agreement * n_hat labels agree
};

struct LedgerEntry {
    std::string relation;   // the ordering relation being instantiated
    std::string surrogate;  // the form actually checked
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
    bool enforced = true;   // false: reported only
};

struct MatchParams {
    double epsilon = 0.0, a = 0.0, c = 0.0, xi = 0.0;
    double variance = 0.0;      // Green-Kubo rho^2
    double k0 = 0.0;            // |S_n| < k0 sqrt(n) except on mass ~ eps^2
    long long n1 = 0, n2 = 0, n_hat = 0;
    std::size_t block_radius = 0;
    double bin_width = 0.0;     // xi / 20, in units of S
    double agreement = 0.0;
    WitnessLevel level;         // a_i = level.a, b_i = level.b, delta_i = level.delta
    std::vector<LedgerEntry> ledger;
};

inline double psi_shift(double k, double ell, long long n2) {
    require(n2 > 0, "n2 must be positive");
    return k - ell / std::sqrt(static_cast<double>(n2));
}

// Radius of the symbol block around n2: covers the cocycle's past window so
// increments after n2 agree exactly, and the chain memory so the tails have
// the same law.
inline std::size_t match_block_radius(const SkewSystem& sys) {
    require(sys.cocycle().past_only(), "matching needs a cocycle depending on the past only");
    const std::size_t w = static_cast<std::size_t>(-sys.cocycle().lo);
    const std::size_t b = sys.gibbs().block_length();
    return std::max(w, b / 2);
}

inline double clt_multiplier(double variance, double epsilon) {
    return std::sqrt(variance) * normal_quantile(1.0 - epsilon * epsilon / 2.0);
}

// Witness at one rigidity level with the repetition count needed for
// n_hat >= hat_ratio * n2, where n2 = max(n1, a_i^2), and for the a_i / b_i
// bound.
inline QuasiEllipticWitness matching_witness(const SpecialFlow& f, std::size_t level, double k0,
                                             const MatchOptions& opt, double overlap_tolerance = 0.3,
                                             double margin = 0.05) {
    require(level >= 1, "tower level must be positive");
    const auto towers = rigidity_towers(f, level);
    const TowerSpec& t = towers.back();
    const double a = 2.0 * t.height;
    const double n2 = std::max(static_cast<double>(opt.n1), std::ceil(a * a));
    const double need_b = k0 * std::sqrt(opt.hat_ratio * n2 + 2.0);
    // a_i / b_i = 4 / M
    const long long m = std::max(static_cast<long long>(std::ceil(4.0 / opt.ratio_bound - 1e-9)),
                                 static_cast<long long>(std::ceil(2.0 * need_b / t.height)));
    return witness_from_towers(f, {t}, {m}, overlap_tolerance, margin);
}

namespace detail {

inline LedgerEntry relation(std::string rel, std::string sur, double lhs, double rhs, bool enforced = true) {
    return {std::move(rel), std::move(sur), lhs, rhs, lhs <= rhs, enforced};
}

}  // namespace detail

// First witness level meeting every enforced relation; the ledger records
// each relation and the moderate form it is checked in.
inline MatchParams choose_params(const MatchOptions& opt, const QuasiEllipticWitness& witness, double variance,
                                 std::size_t block_radius) {
    require(opt.epsilon > 0.0 && opt.epsilon < 1.0, "epsilon must lie in (0, 1)");
    require(variance > 0.0, "matching needs a cocycle with positive variance");
    MatchParams p;
    p.epsilon = opt.epsilon;
    p.a = opt.a;
    p.c = opt.c;
    p.xi = opt.xi;
    p.variance = variance;
    p.k0 = clt_multiplier(variance, opt.epsilon);
    p.n1 = opt.n1;
    p.block_radius = block_radius;
    p.bin_width = opt.xi / 20.0;
    p.agreement = opt.agreement;
    const double e = opt.epsilon, a = opt.a;

    std::vector<LedgerEntry> base{
        detail::relation("10 eps^a <= c", "10 eps^a <= c", 10.0 * std::pow(e, a), opt.c),
        detail::relation("c < 1/10", "c < 1/10", opt.c, 0.1 - 1e-15),
        detail::relation("xi < c", "xi < c", opt.xi, opt.c - 1e-15),
        detail::relation("xi >= eps^{3a}", "eps^{3a} <= xi", std::pow(e, 3.0 * a), opt.xi),
        detail::relation("k0 <= eps^{-a}", "k0 <= eps^{-a}", p.k0, std::pow(e, -a)),
        detail::relation("CLT tail < eps^2", "2(1 - Phi(k0 / rho)) <= eps^2",
                         std::erfc(p.k0 / std::sqrt(2.0 * variance)), e * e * (1.0 + 1e-9)),
        detail::relation("[eps^{-a}] block radius", "cocycle window <= block radius", 0.0,
                         static_cast<double>(block_radius)),
    };

    std::string violated;
    for (const WitnessLevel& l : witness.levels) {
        std::vector<LedgerEntry> led = base;
        const double ai = l.a, bi = l.b;
        const long long n2 = std::max(opt.n1, static_cast<long long>(std::ceil(ai * ai)));
        const double sq = std::sqrt(static_cast<double>(n2));
        const long long n_hat = static_cast<long long>(std::floor(bi * bi / (p.k0 * p.k0) - 1.0));
        led.push_back(detail::relation("delta_i <= eps^{10a}", "delta_i <= c / 2", l.delta, opt.c / 2.0));
        led.push_back(detail::relation("a_i / b_i <= eps^{1000a}", "a_i / b_i <= ratio bound", ai / bi, opt.ratio_bound));
        led.push_back(detail::relation("a_i >= 10 k0^2 n1 + 100 L1 + eps^{-100a}", "k0 <= a_i", p.k0, ai));
        led.push_back(detail::relation("eps^{-20a} a_i <= sqrt(n2)", "a_i <= sqrt(n2)", ai, sq));
        led.push_back(detail::relation("sqrt(n2) <= eps^{800a} b_i", "sqrt(n2) <= b_i", sq, bi));
        led.push_back(detail::relation("n2 >= n1", "n1 <= n2", static_cast<double>(opt.n1), static_cast<double>(n2)));
        led.push_back(detail::relation("n2 <= c^20 eps^8 n_hat", "hat_ratio n2 <= n_hat",
                                       opt.hat_ratio * static_cast<double>(n2), static_cast<double>(n_hat)));
        led.push_back(detail::relation("k0 sqrt(n_hat) <= b_i", "k0 sqrt(n_hat) <= b_i",
                                       p.k0 * std::sqrt(static_cast<double>(std::max(n_hat, 0LL))), bi));
        led.push_back(detail::relation("ell <= eps^{20a} sqrt(n2)", "a_i <= sqrt(n2)", ai, sq));
        led.push_back(detail::relation("theta bound xi/20", "S-bin width <= xi / 20", p.bin_width, opt.xi / 20.0));
        led.push_back(detail::relation("nu(N_i) >= 1 - eps^3/100", "1 - eps^3/100 <= nu(N_i), reported", 1.0 - e * e * e / 100.0,
                                       l.kept_fraction * static_cast<double>(l.tower.q) * l.tower.base_length, false));
        const auto bad = std::find_if(led.begin(), led.end(), [](const LedgerEntry& x) { return x.enforced && !x.holds; });
        if (bad == led.end()) {
            p.level = l;
            p.n2 = n2;
            p.n_hat = n_hat;
            p.ledger = std::move(led);
            return p;
        }
        std::ostringstream os;
        os << "level " << l.tower.level << ": " << bad->surrogate << " fails (" << bad->lhs << " > " << bad->rhs << ")";
        violated += (violated.empty() ? "" : "; ") + os.str();
    }
    if (witness.levels.empty()) violated = "the witness has no usable level";
    throw DomainError("no witness level satisfies the matching relations: " + violated);
}

// Earliest fiber on which d(z, K_{-ell} zbar) < delta_i for some ell in
// [0, a_i], at its exactly aligned height.
inline double find_ell(const SpecialFlow& f, const FlowPoint& z, const FlowPoint& zbar, const WitnessLevel& l) {
    const Alignment al = first_alignment(f, z, zbar, l.a, l.delta);
    if (!(al.distance < l.delta))
        throw DomainError("condition (A) fails: no ell in [0, a_i] brings the fiber points within delta_i");
    return al.time;
}

struct MatchSample {
    std::int64_t bin = 0;
    std::uint64_t alpha = 0;  // code of the symbols n2 - r .. n2 + r
    std::uint64_t index = 0;  // sample number, i.e. its RNG stream
    double s = 0.0;           // S_{n2}
};

struct BucketSide {
    std::vector<MatchSample> kept;  // sorted by (bin, alpha, index)
    std::size_t samples = 0;
    std::size_t tail_discarded = 0;  // |S_{n2}| >= k0 sqrt(n2)
    std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t word_code(const Symbol* w, std::size_t n, std::size_t alphabet) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < n; ++i) c = c * alphabet + w[i];
    return c;
}

// x_1 .. x_{n2 + r} and S_{n2} for one sample stream.
struct Prefix {
    Word symbols;
    double s = 0.0;
};

inline Prefix sample_prefix(const WordChain& wc, const std::vector<double>& values, std::size_t u0, long long n2,
                            std::size_t radius, Rng& rng) {
    Prefix p;
    const std::size_t len = static_cast<std::size_t>(n2) + radius;
    p.symbols.reserve(len);
    std::size_t u = u0;
    for (std::size_t j = 0; j < len; ++j) {
        if (j < static_cast<std::size_t>(n2)) p.s += values[u];
        u = wc.step(u, rng);
        p.symbols.push_back(wc.word(u).back());
    }
    return p;
}

inline std::size_t chain_length(const SkewSystem& sys) {
    return std::max(sys.cocycle().length(), sys.gibbs().block_length());
}

}  // namespace detail

// Samples futures of the leaf with past `past`, drops the CLT tail and keys
// the rest by (floor((S_{n2} + shift) / w), block around n2). The second
// leaf uses shift = ell, which realizes Psi(k) = k - ell / sqrt(n2) without
// rounding.
inline BucketSide bucket_futures(const SkewSystem& sys, const Word& past, const MatchParams& p, double shift,
                                 std::size_t samples, std::uint64_t seed, unsigned threads = 1) {
    require(sys.cocycle().past_only(), "matching needs a cocycle depending on the past only");
    require(p.n2 > 0 && p.bin_width > 0.0, "matching parameters are not initialized");
    const WordChain wc(sys.gibbs(), detail::chain_length(sys));
    require(past.size() >= wc.word_length(), "past shorter than the cocycle window");
    const std::vector<double> values = wc.values(sys.cocycle());
    const std::size_t u0 = wc.state(Word(past.end() - static_cast<long>(wc.word_length()), past.end()));
    const double limit = p.k0 * std::sqrt(static_cast<double>(p.n2));
    const std::size_t r = p.block_radius, m = sys.gibbs().alphabet();
    const std::size_t n2 = static_cast<std::size_t>(p.n2);

    struct Chunk {
        std::vector<MatchSample> kept;
        std::size_t tail = 0;
    };
    const std::size_t chunk = 1 << 14;
    const auto sizes = chunk_sizes(samples, chunk);
    auto parts = run_chunks(sizes.size(), threads, [&](std::size_t c) {
        Chunk out;
        out.kept.reserve(sizes[c]);
        for (std::size_t k = 0; k < sizes[c]; ++k) {
            const std::uint64_t i = c * chunk + k;
            Rng rng = Rng::stream(seed, i);
            const detail::Prefix pre = detail::sample_prefix(wc, values, u0, p.n2, r, rng);
            if (std::fabs(pre.s) >= limit) {
                ++out.tail;
                continue;
            }
            MatchSample s;
            s.s = pre.s;
            s.index = i;
            s.bin = static_cast<std::int64_t>(std::floor((pre.s + shift) / p.bin_width));
            // coordinates n2 - r .. n2 + r are symbols[n2 - r - 1 .. n2 + r - 1]
            s.alpha = detail::word_code(pre.symbols.data() + n2 - r - 1, 2 * r + 1, m);
            out.kept.push_back(s);
        }
        return out;
    });
    BucketSide side;
    side.samples = samples;
    side.seed = seed;
    for (auto& part : parts) {
        side.tail_discarded += part.tail;
        side.kept.insert(side.kept.end(), part.kept.begin(), part.kept.end());
    }
    std::sort(side.kept.begin(), side.kept.end(), [](const MatchSample& x, const MatchSample& y) {
        if (x.bin != y.bin) return x.bin < y.bin;
        if (x.alpha != y.alpha) return x.alpha < y.alpha;
        return x.index < y.index;
    });
    return side;
}

struct MatchedPair {
    std::uint64_t a = 0, b = 0;  // sample indices
    double theta = 0.0;          // S_{n2}(a) - S_{n2}(b) - ell
};

struct MatchingPlan {
    double ell = 0.0;
    std::vector<MatchedPair> pairs;
    std::size_t samples_a = 0, samples_b = 0;
    std::size_t tail_a = 0, tail_b = 0;
    std::size_t excess_a = 0, excess_b = 0;  // unmatched bucket members
    std::size_t buckets = 0;                 // keys present on both sides
    std::uint64_t seed_a = 0, seed_b = 0, seed_tail = 0;
    double max_abs_theta = 0.0;

    // Mass not carried by a pair, averaged over the two leaves.
    double discarded_mass() const {
        const double total = static_cast<double>(samples_a + samples_b);
        return static_cast<double>(tail_a + tail_b + excess_a + excess_b) / total;
    }
    double matched_mass() const {
        return 2.0 * static_cast<double>(pairs.size()) / static_cast<double>(samples_a + samples_b);
    }
};

// Pairs equal keys in sample order up to the smaller count.
inline MatchingPlan build_matching(const BucketSide& a, const BucketSide& b, double ell, std::uint64_t seed_tail) {
    MatchingPlan plan;
    plan.ell = ell;
    plan.samples_a = a.samples;
    plan.samples_b = b.samples;
    plan.tail_a = a.tail_discarded;
    plan.tail_b = b.tail_discarded;
    plan.seed_a = a.seed;
    plan.seed_b = b.seed;
    plan.seed_tail = seed_tail;
    auto less = [](const MatchSample& x, const MatchSample& y) {
        return x.bin != y.bin ? x.bin < y.bin : x.alpha < y.alpha;
    };
    std::size_t i = 0, j = 0;
    const auto& A = a.kept;
    const auto& B = b.kept;
    while (i < A.size() || j < B.size()) {
        if (j == B.size() || (i < A.size() && less(A[i], B[j]))) {
            ++plan.excess_a;
            ++i;
        } else if (i == A.size() || less(B[j], A[i])) {
            ++plan.excess_b;
            ++j;
        } else {
            std::size_t ie = i, je = j;
            while (ie < A.size() && !less(A[i], A[ie])) ++ie;
            while (je < B.size() && !less(B[j], B[je])) ++je;
            const std::size_t k = std::min(ie - i, je - j);
            for (std::size_t t = 0; t < k; ++t) {
                const double theta = A[i + t].s - B[j + t].s - ell;
                plan.pairs.push_back({A[i + t].index, B[j + t].index, theta});
                plan.max_abs_theta = std::max(plan.max_abs_theta, std::fabs(theta));
            }
            plan.excess_a += (ie - i) - k;
            plan.excess_b += (je - j) - k;
            ++plan.buckets;
            i = ie;
            j = je;
        }
    }
    if (plan.pairs.empty())
        throw DomainError(A.empty() || B.empty() ? "no usable bucket: every future fell in the CLT tail"
                                                 : "no usable bucket: the S-bins of the two leaves never meet");
    return plan;
}

// E|X - Y| for independent Poisson(la), Poisson(lb), from
// E|x - Y| = x (2 F(x) - 1) + E Y - 2 E[Y; Y <= x].
inline double poisson_abs_difference(double la, double lb) {
    if (la <= 0.0) return lb;
    if (lb <= 0.0) return la;
    const double top = std::max(la, lb);
    const std::size_t n = static_cast<std::size_t>(std::ceil(top + 12.0 * std::sqrt(top) + 12.0));
    double pa = std::exp(-la), pb = std::exp(-lb);
    double s = 0.0, f = 0.0, g = 0.0;
    for (std::size_t x = 0; x <= n; ++x) {
        if (x > 0) {
            pa *= la / static_cast<double>(x);
            pb *= lb / static_cast<double>(x);
        }
        const double xd = static_cast<double>(x);
        f += pb;
        g += xd * pb;
        s += pa * (xd * (2.0 * f - 1.0) + lb - 2.0 * g);
        if (xd > top && pa < 1e-18 && pb < 1e-18) break;
    }
    return s;
}

// E[S_n | past] through the word chain.
inline double conditional_mean(const SkewSystem& sys, const Word& past, long long n) {
    const WordChain wc(sys.gibbs(), detail::chain_length(sys));
    require(past.size() >= wc.word_length(), "past shorter than the cocycle window");
    const std::vector<double> v = wc.values(sys.cocycle());
    std::vector<double> dist(wc.size(), 0.0), next(wc.size());
    dist[wc.state(Word(past.end() - static_cast<long>(wc.word_length()), past.end()))] = 1.0;
    CompensatedSum mean;
    for (long long j = 0; j < n; ++j) {
        double m = 0.0;
        for (std::size_t u = 0; u < wc.size(); ++u) m += dist[u] * v[u];
        mean.add(m);
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t u = 0; u < wc.size(); ++u)
            for (std::size_t e = wc.begin(u); e < wc.end(u); ++e) next[wc.target(e)] += dist[u] * wc.probability(e);
        dist.swap(next);
    }
    return mean.value();
}

struct DiscardBound {
    double tail = 0.0;      // predicted CLT-tail mass, averaged over the leaves
    double excess = 0.0;    // predicted unmatched bucket mass, averaged over the leaves
    double total = 0.0;
    double mean_a = 0.0, mean_b = 0.0;
};

// Bucket bookkeeping under the local Gaussian model: S_{n2} given a past is
// N(E[S_{n2} | past], rho^2 n2), the block around n2 has its stationary law,
// and bucket counts are Poisson. Each key then loses E|N_A - N_B| samples.
inline DiscardBound discard_bound(const SkewSystem& sys, const Word& past_a, const Word& past_b,
                                  const MatchParams& p, double ell, std::size_t samples) {
    DiscardBound d;
    d.mean_a = conditional_mean(sys, past_a, p.n2);
    d.mean_b = conditional_mean(sys, past_b, p.n2);
    const double sd = std::sqrt(p.variance * static_cast<double>(p.n2));
    const double lim = p.k0 * std::sqrt(static_cast<double>(p.n2));
    auto cdf = [sd](double t, double m) { return 0.5 * std::erfc(-(t - m) / (sd * std::numbers::sqrt2)); };
    auto mass = [&](double lo, double hi, double m) {
        lo = std::max(lo, -lim);
        hi = std::min(hi, lim);
        return hi > lo ? cdf(hi, m) - cdf(lo, m) : 0.0;
    };
    d.tail = 0.5 * ((1.0 - mass(-lim, lim, d.mean_a)) + (1.0 - mass(-lim, lim, d.mean_b)));

    const std::size_t r = p.block_radius;
    const std::vector<Word> blocks = sys.gibbs().matrix().words(2 * r + 1);
    std::vector<double> pw;
    for (const Word& w : blocks) pw.push_back(sys.gibbs().word_measure(w));
    const double w = p.bin_width;
    const auto lo_bin = static_cast<std::int64_t>(std::floor(std::min(-lim, -lim + ell) / w)) - 1;
    const auto hi_bin = static_cast<std::int64_t>(std::floor(std::max(lim, lim + ell) / w)) + 1;
    const double n = static_cast<double>(samples);
    CompensatedSum excess;
    for (std::int64_t k = lo_bin; k <= hi_bin; ++k) {
        const double lo = static_cast<double>(k) * w, hi = lo + w;
        const double ma = mass(lo, hi, d.mean_a), mb = mass(lo - ell, hi - ell, d.mean_b);
        if (ma == 0.0 && mb == 0.0) continue;
        for (double q : pw) excess.add(poisson_abs_difference(n * ma * q, n * mb * q));
    }
    d.excess = excess.value() / (2.0 * n);
    d.total = d.tail + d.excess;
    return d;
}

struct PairCheck {
    bool shared_tail = false;   // identical symbols after n2 + r
    bool shared_block = false;  // identical symbols n2 - r .. n2 + r
    double theta = 0.0;         // from the simulated orbits
    double drift = 0.0;         // sup_j |Delta S_j - Delta S_{n2}| over j in [n2, n_hat]
    double agreement = 0.0;     // fraction of j in [1, n_hat] with equal labels
    bool boundary_clear = false;  // d(boundary Q, K_{S_{n2}} z) >= c
};

struct MatchVerification {
    std::vector<PairCheck> checks;
    bool all_shared_tails = true;
    double max_abs_theta = 0.0;
    double max_drift = 0.0;
    double mean_agreement = 0.0;
    double good_fraction = 0.0;      // pairs with agreement >= params.agreement
    double boundary_clear_fraction = 0.0;
};

namespace detail {

inline Word matched_future(const SkewSystem& sys, const Word& past, const MatchParams& p, std::uint64_t seed,
                           std::uint64_t index, std::uint64_t seed_tail, std::uint64_t pair, std::size_t length) {
    const WordChain wc(sys.gibbs(), chain_length(sys));
    const std::vector<double> values = wc.values(sys.cocycle());
    const std::size_t u0 = wc.state(Word(past.end() - static_cast<long>(wc.word_length()), past.end()));
    Rng rng = Rng::stream(seed, index);
    Word fut = sample_prefix(wc, values, u0, p.n2, p.block_radius, rng).symbols;
    const MarkovGibbs& mg = sys.gibbs();
    Rng tail = Rng::stream(seed_tail, pair);
    Word ctx(past);
    ctx.insert(ctx.end(), fut.begin(), fut.end());
    std::size_t u = mg.terminal_block(ctx, tail);
    while (fut.size() < length) {
        u = mg.step(u, tail);
        fut.push_back(mg.last_symbol(u));
    }
    return fut;
}

}  // namespace detail

// Runs both orbits of the selected pairs for n_hat steps. Pairs are taken at
// evenly spaced positions of the plan.
inline MatchVerification verify_matching(const SkewSystem& sys, const Atom& ra, const Atom& rb, const MatchingPlan& plan,
                                         const MatchParams& p, std::size_t count, unsigned threads = 1) {
    require(!plan.pairs.empty(), "empty matching plan");
    count = std::min(count, plan.pairs.size());
    const std::size_t n_hat = static_cast<std::size_t>(p.n_hat);
    const std::size_t n2 = static_cast<std::size_t>(p.n2), r = p.block_radius;
    const std::size_t length = n_hat + static_cast<std::size_t>(std::max(sys.cocycle().hi, 1L)) + 1;
    auto checks = run_chunks(count, threads, [&](std::size_t c) {
        const std::size_t k = c * plan.pairs.size() / count;
        const MatchedPair& mp = plan.pairs[k];
        const Word fa = detail::matched_future(sys, ra.past, p, plan.seed_a, mp.a, plan.seed_tail, k, length);
        const Word fb = detail::matched_future(sys, rb.past, p, plan.seed_b, mp.b, plan.seed_tail, k, length);
        PairCheck pc;
        pc.shared_block = std::equal(fa.begin() + static_cast<long>(n2 - r - 1), fa.begin() + static_cast<long>(n2 + r),
                                     fb.begin() + static_cast<long>(n2 - r - 1));
        pc.shared_tail = std::equal(fa.begin() + static_cast<long>(n2 + r), fa.end(), fb.begin() + static_cast<long>(n2 + r));

        SkewState sa = make_state(sys, ra.past, ra.y), sb = make_state(sys, rb.past, rb.y);
        sa.word.insert(sa.word.end(), fa.begin(), fa.end());
        sb.word.insert(sb.word.end(), fb.begin(), fb.end());
        double ta = 0.0, tb = 0.0;  // sums of increments from n2 on
        std::size_t agree = 0;
        for (std::size_t j = 1; j <= n_hat; ++j) {
            if (j - 1 >= n2) {
                ta += sys.evaluator()(sa.word.data() + sa.origin);
                tb += sys.evaluator()(sb.word.data() + sb.origin);
                pc.drift = std::max(pc.drift, std::fabs(ta - tb));
            }
            step(sys, sa);
            step(sys, sb);
            if (j == n2) {
                pc.theta = sa.birkhoff - sb.birkhoff - plan.ell;
                pc.boundary_clear = sys.partition().boundary_distance(sa.fiber) >= p.c;
            }
            agree += name(sys, sa) == name(sys, sb) ? 1 : 0;
        }
        pc.agreement = static_cast<double>(agree) / static_cast<double>(n_hat);
        return pc;
    });
    MatchVerification v;
    v.max_abs_theta = plan.max_abs_theta;
    std::size_t good = 0, clear = 0;
    for (const PairCheck& pc : checks) {
        v.all_shared_tails = v.all_shared_tails && pc.shared_tail && pc.shared_block;
        v.max_abs_theta = std::max(v.max_abs_theta, std::fabs(pc.theta));
        v.max_drift = std::max(v.max_drift, pc.drift);
        v.mean_agreement += pc.agreement / static_cast<double>(checks.size());
        good += pc.agreement >= p.agreement ? 1 : 0;
        clear += pc.boundary_clear ? 1 : 0;
    }
    v.good_fraction = static_cast<double>(good) / static_cast<double>(checks.size());
    v.boundary_clear_fraction = static_cast<double>(clear) / static_cast<double>(checks.size());
    v.checks = std::move(checks);
    return v;
}

struct MatchRun {
    MatchParams params;
    Atom atom_a, atom_b;
    MatchingPlan plan;
    DiscardBound bound;
    MatchVerification verification;
    bool pass = false;
};

// Atom with a fiber point in the witness set N_i.
inline Atom sample_match_atom(const SkewSystem& sys, const MatchParams& p, std::size_t depth, Rng& rng) {
    Atom a;
    a.past = sys.gibbs().sample_stationary(std::max(depth, detail::chain_length(sys)), rng);
    a.y = sample_witness_point(sys.flow(), p.level, rng);
    return a;
}

inline MatchRun run_matching(const SkewSystem& sys, const MatchParams& p, std::size_t samples, std::size_t verify,
                             std::uint64_t seed, unsigned threads = 1) {
    MatchRun run;
    run.params = p;
    Rng rng = Rng::stream(seed, 0);
    run.atom_a = sample_match_atom(sys, p, 8, rng);
    run.atom_b = sample_match_atom(sys, p, 8, rng);
    const double ell = find_ell(sys.flow(), run.atom_a.y, run.atom_b.y, p.level);
    const BucketSide a = bucket_futures(sys, run.atom_a.past, p, 0.0, samples, Rng::stream(seed, 1).next(), threads);
    const BucketSide b = bucket_futures(sys, run.atom_b.past, p, ell, samples, Rng::stream(seed, 2).next(), threads);
    run.plan = build_matching(a, b, ell, Rng::stream(seed, 3).next());
    run.bound = discard_bound(sys, run.atom_a.past, run.atom_b.past, p, ell, samples);
    run.verification = verify_matching(sys, run.atom_a, run.atom_b, run.plan, p, verify, threads);
    const MatchVerification& v = run.verification;
    run.pass = v.all_shared_tails && v.max_abs_theta < p.bin_width && v.max_drift == 0.0 &&
               run.plan.discarded_mass() <= 2.0 * run.bound.total && v.good_fraction >= 0.8;
    return run;
}

}  // namespace skewlab
