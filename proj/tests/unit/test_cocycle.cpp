#include <gtest/gtest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "skewlab/cocycle/aperiodicity.hpp"
#include "skewlab/cocycle/green_kubo.hpp"
#include "skewlab/cocycle/io.hpp"

using namespace skewlab;

namespace {

const double kPhi = oracle::golden_ratio();

Cocycle one_coordinate(const TransitionMatrix& a, std::vector<double> v) {
    return Cocycle::tabulate(a, 0, 0, [v](const Word& w) { return v[w[0]]; });
}

// 1[x_0 = 1] + sqrt(2) 1[x_{-2} x_{-1} x_0 = 000] on the golden-mean shift.
Cocycle golden_aperiodic(const TransitionMatrix& a) {
    return Cocycle::tabulate(a, -2, 0, [](const Word& w) {
        return (w[2] == 1 ? 1.0 : 0.0) + (w[0] == 0 && w[1] == 0 && w[2] == 0 ? std::sqrt(2.0) : 0.0);
    });
}

Cocycle coboundary(const TransitionMatrix& a, const std::function<double(Symbol)>& h) {
    // h(x_1) - h(x_0)
    return Cocycle::tabulate(a, 0, 1, [h](const Word& w) { return h(w[1]) - h(w[0]); });
}

SymbolicWindow random_window(const MarkovGibbs& mg, std::size_t past, std::size_t future, Rng& rng) {
    Word w = mg.sample_stationary(past + future, rng);
    return {Word(w.begin(), w.begin() + static_cast<long>(past)), Word(w.begin() + static_cast<long>(past), w.end())};
}

}  // namespace

TEST(Birkhoff, TrivialCases) {
    auto a = TransitionMatrix::full(2);
    SymbolicWindow x{{0}, {1, 0, 1, 0, 1}};
    EXPECT_EQ(birkhoff_sum(Cocycle::zero(a), x, 5), 0.0);
    EXPECT_EQ(birkhoff_sum(one_coordinate(a, {1, -1}), x, 4), 0.0);
    EXPECT_THROW(birkhoff_sum(one_coordinate(a, {1, -1}), x, 7), DomainError);
}

TEST(Birkhoff, CocycleIdentity) {
    auto a = TransitionMatrix::golden_mean();
    auto mg = parry_measure(a);
    auto c = golden_aperiodic(a);
    Rng rng(5);
    for (int t = 0; t < 10000; ++t) {
        const long n = static_cast<long>(rng.below(40)), m = static_cast<long>(rng.below(40));
        SymbolicWindow x = random_window(mg, 3, 80, rng);
        SymbolicWindow shifted;  // sigma^n x
        Word all = x.past;
        all.insert(all.end(), x.future.begin(), x.future.end());
        const long zero = static_cast<long>(x.past.size()) - 1 + n;
        shifted.past.assign(all.begin(), all.begin() + zero + 1);
        shifted.future.assign(all.begin() + zero + 1, all.end());
        double direct = 0;
        for (long k = 0; k < n + m; ++k) direct += c.at(x, k);
        EXPECT_NEAR(birkhoff_sum(c, x, n + m), birkhoff_sum(c, x, n) + birkhoff_sum(c, shifted, m), 1e-12);
        EXPECT_NEAR(birkhoff_sum(c, x, n + m), direct, 1e-12);
    }
}

TEST(Center, Examples) {
    auto full = TransitionMatrix::full(2);
    auto mg2 = parry_measure(full);
    auto c = center(one_coordinate(full, {1, 1}), mg2);
    EXPECT_NEAR(c(Word{0}), 0.0, 1e-15);
    EXPECT_NEAR(c(Word{1}), 0.0, 1e-15);
    auto pm = one_coordinate(full, {1, -1});
    EXPECT_EQ(center(pm, mg2)(Word{0}), 1.0);

    auto g = TransitionMatrix::golden_mean();
    auto mg = parry_measure(g);
    auto cg = center(one_coordinate(g, {1, 0}), mg);
    const double p0 = kPhi * kPhi / (1 + kPhi * kPhi);
    EXPECT_NEAR(cg(Word{0}), 1 - p0, 1e-12);
    EXPECT_NEAR(cg(Word{1}), -p0, 1e-12);
    EXPECT_LT(std::abs(cocycle_mean(cg, mg)), 1e-14);
}

TEST(ReduceToPast, PastOnlyIsIdentity) {
    auto a = TransitionMatrix::golden_mean();
    auto c = golden_aperiodic(a);
    auto r = reduce_to_past(c, parry_measure(a));
    EXPECT_EQ(r.past.table, c.table);
    for (const auto& [w, v] : r.transfer.table) EXPECT_EQ(v, 0.0);
}

namespace {

void check_cohomology(const TransitionMatrix& a, const Cocycle& c, std::size_t len) {
    auto mg = parry_measure(a);
    auto r = reduce_to_past(c, mg);
    EXPECT_TRUE(r.past.past_only());
    double worst = 0;
    std::size_t checked = 0;
    for (const Word& w : a.words(len)) {
        // place coordinate 0 so that every evaluation below fits
        const long zero = -r.past.lo;
        SymbolicWindow x{Word(w.begin(), w.begin() + zero + 1), Word(w.begin() + zero + 1, w.end())};
        for (long k = 0; x.covers(k + std::max(c.hi, r.transfer.hi + 1)); ++k) {
            const double lhs = c.at(x, k);
            const double rhs = r.past.at(x, k) + r.transfer.at(x, k + 1) - r.transfer.at(x, k);
            worst = std::max(worst, std::abs(lhs - rhs));
            ++checked;
        }
    }
    EXPECT_GT(checked, 0u);
    EXPECT_LE(worst, 1e-12);
}

}  // namespace

TEST(ReduceToPast, CohomologyIdentityExhaustive) {
    auto full = TransitionMatrix::full(2);
    Rng rng(3);
    auto c2 = Cocycle::tabulate(full, 0, 1, [&](const Word&) { return rng.uniform(-1, 1); });
    check_cohomology(full, c2, 10);
    auto g = TransitionMatrix::golden_mean();
    auto c3 = Cocycle::tabulate(g, -1, 2, [&](const Word&) { return rng.uniform(-1, 1); });
    check_cohomology(g, c3, 12);
    auto a3 = TransitionMatrix({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
    auto c4 = Cocycle::tabulate(a3, -1, 1, [&](const Word&) { return rng.uniform(-1, 1); });
    check_cohomology(a3, c4, 8);
}

TEST(ReduceToPast, BirkhoffSumsDifferByBoundedTransfer) {
    auto full = TransitionMatrix::full(2);
    auto mg = parry_measure(full);
    Rng rng(8);
    auto c = Cocycle::tabulate(full, 0, 2, [&](const Word&) { return rng.uniform(-1, 1); });
    auto r = reduce_to_past(c, mg);
    const double hmax = r.transfer.max_abs();
    for (int t = 0; t < 200; ++t) {
        SymbolicWindow x = random_window(mg, 8, 120, rng);
        for (long n : {1L, 7L, 50L, 100L}) {
            const double d = birkhoff_sum(c, x, n) - birkhoff_sum(r.past, x, n);
            EXPECT_NEAR(d, r.transfer.at(x, n) - r.transfer.at(x, 0), 1e-12);
            EXPECT_LE(std::abs(d), 2 * hmax + 1e-12);
        }
    }
}

TEST(GreenKubo, IidPlusMinusOne) {
    auto full = TransitionMatrix::full(2);
    auto r = green_kubo_variance(one_coordinate(full, {1, -1}), parry_measure(full));
    EXPECT_NEAR(r.variance, 1.0, 1e-14);
    EXPECT_LT(r.truncation_error_bound, 1e-14);
}

TEST(GreenKubo, CoboundaryVanishes) {
    auto a = TransitionMatrix({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
    auto mg = parry_measure(a);
    auto cob = center(coboundary(a, [](Symbol s) { return std::sin(3.0 * s + 1); }), mg);
    EXPECT_LT(green_kubo_variance(cob, mg).variance, 1e-8);
}

TEST(GreenKubo, RejectsUncentered) {
    auto full = TransitionMatrix::full(2);
    EXPECT_THROW(green_kubo_variance(one_coordinate(full, {1, 0}), parry_measure(full)), DomainError);
}

TEST(GreenKubo, PeriodicChainRejected) {
    auto a = TransitionMatrix({{0, 1}, {1, 0}});
    auto mg = parry_measure(a);
    EXPECT_THROW(green_kubo_variance(one_coordinate(a, {1, -1}), mg), DomainError);
}

TEST(GreenKubo, MatchesFundamentalMatrixOracle) {
    auto a = TransitionMatrix({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
    Potential f;
    f.window = 1;
    Rng rng(21);
    for (const Word& w : a.words(2)) f.values[w] = rng.uniform(-1, 1);
    auto mg = gibbs_from_potential(a, f);
    auto c = center(one_coordinate(a, {0.3, -1.1, 2.0}), mg);
    auto r = green_kubo_variance(c, mg);
    std::vector<double> psi{c(Word{0}), c(Word{1}), c(Word{2})};
    EXPECT_NEAR(r.variance, oracle::fundamental_matrix_variance(mg.dense_transitions(), mg.stationary(), psi), 1e-12);
}

TEST(GreenKubo, CohomologyInvariance) {
    auto g = TransitionMatrix::golden_mean();
    auto mg = parry_measure(g);
    auto c = center(golden_aperiodic(g), mg);
    auto cob = coboundary(g, [](Symbol s) { return s ? 0.7 : -0.2; });
    Cocycle sum = Cocycle::tabulate(g, -2, 1, [&](const Word& w) {
        return c(Word(w.begin(), w.begin() + 3)) + cob(Word(w.begin() + 2, w.end()));
    });
    auto r1 = green_kubo_variance(c, mg);
    auto r2 = green_kubo_variance(center(sum, mg), mg);
    EXPECT_NEAR(r1.variance, r2.variance, 1e-12 + r1.truncation_error_bound + r2.truncation_error_bound);
}

TEST(GreenKubo, AgreesWithEmpiricalVariance) {
    auto g = TransitionMatrix::golden_mean();
    auto mg = parry_measure(g);
    auto c = center(one_coordinate(g, {1.0, -kPhi * kPhi}), mg);
    const double rho2 = green_kubo_variance(c, mg).variance;
    WordChain chain(mg, 1);
    const auto v = chain.values(c);
    const int samples = 40000;
    const long n = 10000;
    Rng rng(99);
    double s2 = 0;
    for (int i = 0; i < samples; ++i) {
        std::size_t u = chain.sample_stationary(rng);
        double s = 0;
        for (long k = 0; k < n; ++k) {
            s += v[u];
            u = chain.step(u, rng);
        }
        s2 += s * s;
    }
    const double empirical = s2 / samples / static_cast<double>(n);
    EXPECT_NEAR(empirical / rho2, 1.0, 0.02);
}

TEST(Aperiodicity, PlusMinusOneIsLattice) {
    auto full = TransitionMatrix::full(2);
    auto v = aperiodicity_test(one_coordinate(full, {1, -1}), parry_measure(full), 12);
    ASSERT_EQ(v.verdict, Periodicity::periodic);
    ASSERT_TRUE(v.lattice_gap.has_value());
    const double ratio = 2.0 / *v.lattice_gap;
    EXPECT_NEAR(ratio, std::round(ratio), 1e-9);
    for (const auto& o : v.witness_orbits) {
        const double k = (o.sum - static_cast<double>(o.cycle.size()) * *v.rho) / *v.lattice_gap;
        EXPECT_NEAR(k, std::round(k), 1e-9);
    }
}

TEST(Aperiodicity, CoboundaryPlusConstantIsPeriodic) {
    auto a = TransitionMatrix({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
    auto c = coboundary(a, [](Symbol s) { return std::sqrt(2.0 + s); });
    for (auto& [w, v] : c.table) v += 1.0;
    auto r = aperiodicity_test(c, parry_measure(a), 10);
    EXPECT_EQ(r.verdict, Periodicity::periodic);
    EXPECT_NEAR(*r.rho, 1.0, 1e-12);
}

TEST(Aperiodicity, GoldenTwoValueCocycleIsLattice) {
    // Orbit sums of c(x_0) = (1, -phi^2) satisfy p_j S_i - p_i S_j in (1 + phi^2) Z.
    auto g = TransitionMatrix::golden_mean();
    auto mg = parry_measure(g);
    auto r = aperiodicity_test(center(one_coordinate(g, {1.0, -kPhi * kPhi}), mg), mg, 12);
    ASSERT_EQ(r.verdict, Periodicity::periodic);
    const double ratio = (1 + kPhi * kPhi) / *r.lattice_gap;
    EXPECT_NEAR(ratio, std::round(ratio), 1e-9);
}

TEST(Aperiodicity, GoldenThreeCoordinateCocycleIsAperiodic) {
    auto g = TransitionMatrix::golden_mean();
    auto mg = parry_measure(g);
    auto c = center(golden_aperiodic(g), mg);
    auto r = aperiodicity_test(c, mg, 12);
    EXPECT_EQ(r.verdict, Periodicity::aperiodic);
    // unchanged by a coboundary and a constant
    auto cob = coboundary(g, [](Symbol s) { return s ? 0.3 : 1.9; });
    Cocycle moved = Cocycle::tabulate(g, -2, 1, [&](const Word& w) {
        return c(Word(w.begin(), w.begin() + 3)) + cob(Word(w.begin() + 2, w.end())) + 0.25;
    });
    EXPECT_EQ(aperiodicity_test(moved, mg, 12).verdict, Periodicity::aperiodic);
}

TEST(Aperiodicity, LatticeVerdictStableUnderCoboundary) {
    auto full = TransitionMatrix::full(2);
    auto base = one_coordinate(full, {1, -1});
    auto cob = coboundary(full, [](Symbol s) { return s ? std::sqrt(3.0) : 0.0; });
    Cocycle moved = Cocycle::tabulate(full, 0, 1, [&](const Word& w) { return base(Word{w[0]}) + cob(w) + 0.5; });
    auto r = aperiodicity_test(moved, parry_measure(full), 10);
    EXPECT_EQ(r.verdict, Periodicity::periodic);
}

TEST(Aperiodicity, PeriodCapIsResourceError) {
    auto full = TransitionMatrix::full(2);
    EXPECT_THROW(aperiodicity_test(Cocycle::zero(full), parry_measure(full), 15), ResourceError);
}

TEST(OrbitSumDensity, ZeroCocycle) {
    auto full = TransitionMatrix::full(2);
    Rng rng(1);
    auto r = orbit_sum_density(Cocycle::zero(full), parry_measure(full), 1000, 1.5, rng);
    EXPECT_EQ(r.largest_gap, 3.0);
}

TEST(OrbitSumDensity, LatticeCocycleGapMatchesLattice) {
    // S_n of c(x_0) = (1, -1) lies in n + 2Z; together these fill Z.
    auto full = TransitionMatrix::full(2);
    Rng rng(2);
    for (long n : {1000L, 10000L}) {
        auto r = orbit_sum_density(one_coordinate(full, {1, -1}), parry_measure(full), n, 3.0, rng);
        EXPECT_NEAR(r.largest_gap, 1.0, 1e-12);
    }
}

TEST(OrbitSumDensity, AperiodicSumsFillTheInterval) {
    auto g = TransitionMatrix::golden_mean();
    auto mg = parry_measure(g);
    auto c = center(golden_aperiodic(g), mg);
    Rng rng(3);
    auto small = orbit_sum_density(c, mg, 10000, 1.0, rng);
    auto large = orbit_sum_density(c, mg, 1000000, 1.0, rng);
    EXPECT_LT(large.largest_gap, 0.05);
    EXPECT_LT(large.largest_gap, small.largest_gap);
}

TEST(CocycleText, ParsesAndValidates) {
    auto g = TransitionMatrix::golden_mean();
    auto doc = KvDocument::parse("[cocycle]\nwindow = 0 0\nvalue = 0 : 1\nvalue = 1 : -2.5\n", "mem");
    auto c = read_cocycle(doc.at("cocycle"), g);
    EXPECT_EQ(c(Word{1}), -2.5);
    auto missing = KvDocument::parse("[cocycle]\nwindow = 0 0\nvalue = 0 : 1\n", "mem");
    EXPECT_THROW(read_cocycle(missing.at("cocycle"), g), ConfigError);
}
