#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "skewlab/cocycle/cocycle.hpp"
#include "skewlab/core/rng.hpp"

namespace skewlab {

struct PeriodicOrbit {
    Word cycle;  // one period, rotation-minimal
    double sum;  // S_p over one period
};

enum class Periodicity { periodic, aperiodic, inconclusive };

inline const char* to_string(Periodicity p) {
    switch (p) {
        case Periodicity::periodic: return "periodic";
        case Periodicity::aperiodic: return "aperiodic";
        default: return "inconclusive";
    }
}

struct AperiodicityVerdict {
    Periodicity verdict = Periodicity::inconclusive;
    std::optional<double> lattice_gap;  // lambda when periodic with a nontrivial lattice
    std::optional<double> rho;
    double resolution = 1e-3;
    double group_generator = 0.0;  // numerical gcd of the pairwise combinations
    std::vector<PeriodicOrbit> witness_orbits;
};

// Sum of c over one period of the periodic point with period word w.
inline double periodic_orbit_sum(const Cocycle& c, const Word& w) {
    const long p = static_cast<long>(w.size());
    double s = 0.0;
    Word buf(c.length());
    for (long k = 0; k < p; ++k) {
        for (long i = c.lo; i <= c.hi; ++i) buf[static_cast<std::size_t>(i - c.lo)] = w[static_cast<std::size_t>(((k + i) % p + p) % p)];
        s += c(buf);
    }
    return s;
}

// Primitive periodic orbits of period <= max_period, one representative each.
inline std::vector<Word> periodic_orbits(const TransitionMatrix& a, std::size_t max_period) {
    std::vector<Word> out;
    for (std::size_t p = 1; p <= max_period; ++p) {
        for (const Word& w : a.words(p)) {
            if (!a.allowed(w.back(), w.front())) continue;
            bool minimal = true, primitive = true;
            for (std::size_t r = 1; r < p && minimal; ++r) {
                Word rot(w.begin() + static_cast<long>(r), w.end());
                rot.insert(rot.end(), w.begin(), w.begin() + static_cast<long>(r));
                if (rot < w) minimal = false;
                if (rot == w) primitive = false;
            }
            if (minimal && primitive) out.push_back(w);
        }
    }
    return out;
}

// Largest g with every value an integer multiple of g (within tol), by the
// Euclidean algorithm; fmod is exact in floating point.
inline double real_gcd(std::vector<double> values, double tol) {
    double g = 0.0;
    for (double v : values) {
        double a = std::abs(v), b = g;
        if (a < tol) continue;
        if (b < tol) {
            g = a;
            continue;
        }
        if (a < b) std::swap(a, b);
        while (b >= tol) {
            double r = std::fmod(a, b);
            if (b - r < tol) r = 0.0;
            a = b;
            b = r;
        }
        g = a;
    }
    return g;
}

// c = rho + g - g o sigma + lambda q forces every orbit sum into p rho + lambda Z,
// hence every combination p_j S_i - p_i S_j into lambda Z. A numerical gcd of
// those combinations below `resolution` means the orbit-sum group is dense at
// that resolution; a gcd for which some rho is verified means periodic.
inline AperiodicityVerdict aperiodicity_test(const Cocycle& c, const MarkovGibbs& mg, std::size_t max_period = 12,
                                             double resolution = 1e-3) {
    if (max_period > 14) throw ResourceError("aperiodicity_test enumerates orbits only up to period 14");
    const double tol = 1e-9;
    AperiodicityVerdict out;
    out.resolution = resolution;
    for (const Word& w : periodic_orbits(mg.matrix(), max_period)) out.witness_orbits.push_back({w, periodic_orbit_sum(c, w)});
    const auto& orb = out.witness_orbits;
    // Combinations against the shortest orbit r span p_r times the full
    // pairwise group; the divisor search below absorbs the factor p_r.
    std::vector<double> combos;
    if (!orb.empty()) {
        const PeriodicOrbit& r = *std::min_element(orb.begin(), orb.end(), [](const auto& x, const auto& y) {
            return x.cycle.size() < y.cycle.size();
        });
        for (const auto& o : orb)
            combos.push_back(static_cast<double>(r.cycle.size()) * o.sum - static_cast<double>(o.cycle.size()) * r.sum);
    }
    const double g = real_gcd(combos, tol);
    out.group_generator = g;
    if (g == 0.0) {  // all normalized orbit sums agree: coboundary plus constant
        out.verdict = Periodicity::periodic;
        out.rho = orb.empty() ? 0.0 : orb.front().sum / static_cast<double>(orb.front().cycle.size());
        return out;
    }
    if (g < resolution) {
        out.verdict = Periodicity::aperiodic;
        return out;
    }
    auto on_lattice = [&](double x, double lambda) {
        const double k = std::round(x / lambda);
        return std::abs(x - k * lambda) < tol * std::max(1.0, std::abs(x));
    };
    // The lattice may be a divisor of g; try g/k and every rho consistent with
    // the shortest orbit.
    const PeriodicOrbit& ref = *std::min_element(orb.begin(), orb.end(), [](const auto& x, const auto& y) {
        return x.cycle.size() < y.cycle.size();
    });
    const double pref = static_cast<double>(ref.cycle.size());
    for (int k = 1; k <= 12; ++k) {
        const double lambda = g / k;
        for (int shift = 0; shift < static_cast<int>(pref) * k; ++shift) {
            const double rho = (ref.sum + shift * lambda) / pref;
            bool ok = true;
            for (const auto& o : orb)
                if (!on_lattice(o.sum - static_cast<double>(o.cycle.size()) * rho, lambda)) {
                    ok = false;
                    break;
                }
            if (ok) {
                out.verdict = Periodicity::periodic;
                out.lattice_gap = lambda;
                out.rho = rho;
                return out;
            }
        }
    }
    out.verdict = Periodicity::inconclusive;
    return out;
}

struct DensityReport {
    double largest_gap = 0.0;
    std::size_t points_in_range = 0;
    long n_max = 0;
    double radius = 0.0;
};

// Largest gap of {S_n(x) : |n| <= n_max} inside [-R, R], boundaries included,
// for a point x drawn from the stationary measure. Fewer than two distinct
// points give 2R.
inline DensityReport orbit_sum_density(const Cocycle& c, const MarkovGibbs& mg, long n_max, double radius, Rng& rng) {
    const long pad = c.hi - c.lo + 1;
    const Word seq = mg.sample_stationary(static_cast<std::size_t>(2 * n_max + 2 * pad + 1), rng);
    const long origin = n_max + pad;  // index of coordinate 0
    auto value = [&](long k) {       // c(sigma^k x)
        Word w(seq.begin() + (origin + k + c.lo), seq.begin() + (origin + k + c.hi + 1));
        return c(w);
    };
    std::vector<double> pts{0.0};
    double s = 0.0;
    for (long n = 1; n <= n_max; ++n) {
        s += value(n - 1);
        if (std::abs(s) <= radius) pts.push_back(s);
    }
    s = 0.0;
    for (long n = 1; n <= n_max; ++n) {
        s -= value(-n);
        if (std::abs(s) <= radius) pts.push_back(s);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    DensityReport r;
    r.n_max = n_max;
    r.radius = radius;
    r.points_in_range = pts.size();
    if (pts.size() < 2) {
        r.largest_gap = 2.0 * radius;
        return r;
    }
    double gap = std::max(pts.front() + radius, radius - pts.back());
    for (std::size_t i = 1; i < pts.size(); ++i) gap = std::max(gap, pts[i] - pts[i - 1]);
    r.largest_gap = gap;
    return r;
}

}  // namespace skewlab
