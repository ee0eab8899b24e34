#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "../support/oracles.hpp"
#include "skewlab/stats/clt.hpp"
#include "skewlab/stats/mllt.hpp"

using namespace skewlab;

namespace {

Cocycle one_coordinate(const TransitionMatrix& a, std::vector<double> v) {
    return Cocycle::tabulate(a, 0, 0, [v](const Word& w) { return v[w[0]]; });
}

Cocycle golden_aperiodic(const MarkovGibbs& mg) {
    return center(Cocycle::tabulate(mg.matrix(), -2, 0,
                                    [](const Word& w) {
                                        return (w[2] == 1 ? 1.0 : 0.0) +
                                               (w[0] == 0 && w[1] == 0 && w[2] == 0 ? std::sqrt(2.0) : 0.0);
                                    }),
                  mg);
}

// Symmetric aperiodic cocycle on the full 4-shift: values -1, 1, -sqrt 2, sqrt 2.
Cocycle symmetric4(const TransitionMatrix& a) { return one_coordinate(a, {-1.0, 1.0, -std::sqrt(2.0), std::sqrt(2.0)}); }

}  // namespace

TEST(Gaussian, NormalizedDensityIntegratesToOne) {
    for (double v : {0.3, 1.0, 4.7}) {
        GaussianRef g(v);
        const double s = g.sd();
        EXPECT_NEAR(simpson([&](double t) { return g.pdf(t); }, -14 * s, 14 * s, 20000), 1.0, 1e-10);
        EXPECT_NEAR(g.cdf(0.0), 0.5, 1e-15);
        EXPECT_EQ(g.unnormalized_form(0.0), 1.0);
        EXPECT_NEAR(g.unnormalized_form(1.0), std::exp(-v / 2), 1e-15);
    }
    EXPECT_THROW(GaussianRef(0.0), DomainError);
}

TEST(Ks, QuantileSampleAndPvalue) {
    GaussianRef g(1.0);
    std::vector<double> q;
    const int n = 1000;
    // inverse CDF by bisection
    for (int i = 0; i < n; ++i) {
        double lo = -10, hi = 10, target = (i + 0.5) / n;
        for (int k = 0; k < 200; ++k) {
            const double mid = (lo + hi) / 2;
            (g.cdf(mid) < target ? lo : hi) = mid;
        }
        q.push_back((lo + hi) / 2);
    }
    EXPECT_NEAR(ks_statistic(q, [&](double t) { return g.cdf(t); }), 0.5 / n, 1e-12);
    EXPECT_NEAR(ks_pvalue(1.358 / std::sqrt(1e6), 1000000), 0.05, 2e-3);
    EXPECT_GT(ks_pvalue(0.01, 100), ks_pvalue(0.2, 100));
    EXPECT_EQ(two_sample_distance(q, q), 0.0);
    EXPECT_EQ(two_sample_distance({0, 1}, {2, 3}), 1.0);
}

TEST(Clt, IidPlusMinusOne) {
    auto a = TransitionMatrix::full(2);
    auto r = clt_experiment(parry_measure(a), one_coordinate(a, {1, -1}), 10000, 20000, 1);
    EXPECT_EQ(r.variance, 1.0);
    EXPECT_LE(r.ks, 0.02);
    EXPECT_NEAR(r.empirical_variance, 1.0, 0.05);
}

TEST(Clt, CoboundaryRejected) {
    auto a = TransitionMatrix::full(2);
    auto cob = Cocycle::tabulate(a, 0, 1, [](const Word& w) { return 1.0 * w[1] - 1.0 * w[0]; });
    EXPECT_THROW(clt_experiment(parry_measure(a), cob, 100, 100, 1), DomainError);
}

TEST(Clt, GoldenAperiodicCocycle) {
    auto mg = parry_measure(TransitionMatrix::golden_mean());
    auto r = clt_experiment(mg, golden_aperiodic(mg), 10000, 20000, 2);
    EXPECT_LE(r.ks, 0.03);
    EXPECT_NEAR(r.empirical_variance / r.variance, 1.0, 0.05);
}

TEST(Clt, ThreadCountInvariant) {
    auto mg = parry_measure(TransitionMatrix::golden_mean());
    auto c = golden_aperiodic(mg);
    auto a = clt_experiment(mg, c, 300, 10000, 3, 1);
    auto b = clt_experiment(mg, c, 300, 10000, 3, 4);
    EXPECT_EQ(a.normalized, b.normalized);
    EXPECT_EQ(a.ks, b.ks);
}

TEST(ConditionalClt, FullShiftIgnoresPast) {
    auto a = TransitionMatrix::full(3);
    auto mg = parry_measure(a);
    auto c = center(one_coordinate(a, {0.5, -1.0, std::sqrt(3.0)}), mg);
    auto u = clt_experiment(mg, c, 500, 20000, 4);
    auto k = conditional_clt_experiment(mg, c, {2, 2, 1}, 500, 20000, 5);
    // S_n includes c(x_0) = c(1) exactly; the rest is independent of the past
    EXPECT_LT(two_sample_distance(u.normalized, k.normalized), 1.63 * std::sqrt(2.0 / 20000) + 0.02);
}

TEST(ConditionalClt, GoldenTwoPasts) {
    auto mg = parry_measure(TransitionMatrix::golden_mean());
    auto c = golden_aperiodic(mg);
    auto a = conditional_clt_experiment(mg, c, {0, 0, 0, 0, 0, 0}, 10000, 20000, 6);
    auto b = conditional_clt_experiment(mg, c, {1, 0, 1, 0, 0, 1}, 10000, 20000, 7);
    EXPECT_LE(a.ks, 0.04);
    EXPECT_LE(b.ks, 0.04);
    EXPECT_LE(two_sample_distance(a.normalized, b.normalized), 0.03);
}

TEST(ConditionalClt, TwoStepLawIsExact) {
    auto a = TransitionMatrix({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
    Potential pot;
    pot.window = 1;
    Rng prng(8);
    for (const Word& w : a.words(2)) pot.values[w] = prng.uniform(-1, 1);
    auto mg = gibbs_from_potential(a, pot);
    auto c = center(one_coordinate(a, {0.0, 1.0, std::sqrt(5.0)}), mg);
    const Word past{2, 2};
    const std::size_t N = 100000;
    auto r = conditional_clt_experiment(mg, c, past, 2, N, 9);
    // S_2 = c(2) + c(x_1), x_1 drawn from the transition row of 2
    std::map<long, double> seen;
    for (double v : r.normalized) seen[std::lround(v * std::sqrt(2.0) * 1e6)] += 1.0 / N;
    const std::size_t b2 = *mg.find_block(Word{2});
    for (Symbol s : {0, 1, 2}) {
        const double p = mg.transition(b2, *mg.find_block(Word{s}));
        const long key = std::lround((c(Word{2}) + c(Word{s})) * 1e6);
        EXPECT_NEAR(seen[key], p, 4 * std::sqrt(p * (1 - p) / N));
    }
}

TEST(Mllt, RefusesLatticeCocycle) {
    auto a = TransitionMatrix::full(2);
    EXPECT_THROW(mllt_surface(parry_measure(a), one_coordinate(a, {1, -1}), {0}, {{{0}, {1}}}, -1, 1, 100, 100, 1),
                 DomainError);
}

TEST(Mllt, SymmetricCocycleGivesSymmetricCells) {
    auto a = TransitionMatrix::full(4);
    auto mg = parry_measure(a);
    auto s = mllt_surface(mg, symmetric4(a), {-1, 1}, {{{}, {}}}, -0.5, 0.5, 100, 400000, 10);
    EXPECT_EQ(s.verdict, Periodicity::aperiodic);
    ASSERT_EQ(s.cells.size(), 2u);
    EXPECT_LE(std::max(s.cells[0].ci_low, s.cells[1].ci_low), std::min(s.cells[0].ci_high, s.cells[1].ci_high));
}

TEST(Mllt, LongerCylinderScalesEstimate) {
    auto a = TransitionMatrix::full(3);
    auto mg = parry_measure(a);
    auto c = center(one_coordinate(a, {0.5, -1.0, std::sqrt(3.0)}), mg);
    auto s = mllt_surface(mg, c, {0}, {{{0}, {}}, {{0, 1}, {}}}, -1.0, 1.0, 100, 1000000, 11);
    const auto& one = s.cells[0];
    const auto& two = s.cells[1];
    // tripled estimate of the longer cylinder overlaps the shorter one
    EXPECT_LE(std::max(one.ci_low, 3 * two.ci_low), std::min(one.ci_high, 3 * two.ci_high));
    EXPECT_NEAR(one.ratio / two.ratio, 1.0, 0.1);
}

TEST(Mllt, ConditionalOnFullShiftMatchesUnconditional) {
    auto a = TransitionMatrix::full(4);
    auto mg = parry_measure(a);
    auto c = symmetric4(a);
    const std::vector<double> ks{0.0, 0.5};
    auto u = mllt_surface(mg, c, ks, {{{0}, {1}}, {{0}, {3}}}, -0.5, 0.5, 100, 1600000, 12);
    auto k = conditional_mllt_surface(mg, c, {2, 0}, ks, {{1}, {3}}, -0.5, 0.5, 100, 400000, 13);
    // on the full shift the past beyond x_0 is irrelevant: ratios agree
    for (std::size_t i = 0; i < u.cells.size(); ++i)
        EXPECT_LE(std::max(u.cells[i].ratio_low, k.cells[i].ratio_low), std::min(u.cells[i].ratio_high, k.cells[i].ratio_high)) << i;
}

TEST(Mllt, WholeSpaceIsSumOverPartition) {
    auto mg = parry_measure(TransitionMatrix::golden_mean());
    auto c = golden_aperiodic(mg);
    const Word past{0, 1, 0, 0};
    auto s = conditional_mllt_surface(mg, c, past, {0.0}, {{}, {0}, {1}}, -1.0, 1.0, 200, 400000, 14);
    EXPECT_EQ(s.cells[0].hits, s.cells[1].hits + s.cells[2].hits);
    const double weighted = s.cells[1].ratio * mg.word_measure({0}) + s.cells[2].ratio * mg.word_measure({1});
    EXPECT_NEAR(s.cells[0].ratio, weighted, 1e-12);
}

TEST(Mllt, CsvHasOneRowPerCell) {
    auto a = TransitionMatrix::full(4);
    auto s = mllt_surface(parry_measure(a), symmetric4(a), {0}, {{{0}, {1}}, {{2}, {3}}}, -1, 1, 50, 1000, 15);
    std::ostringstream os;
    write_mllt_csv(os, s);
    const std::string text = os.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}
