#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "skewlab/cli/config.hpp"
#include "skewlab/cli/report.hpp"
#include "skewlab/cocycle/aperiodicity.hpp"
#include "skewlab/cocycle/green_kubo.hpp"
#include "skewlab/dbar/vwb.hpp"
#include "skewlab/fiber/towers.hpp"
#include "skewlab/match/match.hpp"
#include "skewlab/stats/clt.hpp"
#include "skewlab/stats/mllt.hpp"

namespace skewlab {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

// Everything one subcommand produces. Reports never contain the thread count
// or timings, so reruns are byte-identical for any --threads.
struct Artifact {
    std::string kind;
    Table table;
    Json json;
    std::optional<Plot> plot;
    bool pass = false;
    std::string diagnostic;  // why the run failed, when it did
};

inline Json word_json(const Word& w) {
    Json j = Json::array();
    for (Symbol s : w) j.push_back(s);
    return j;
}

inline Artifact start_artifact(const std::string& kind, const ExperimentConfig& cfg, std::uint64_t seed) {
    Artifact a;
    a.kind = kind;
    a.json["schema_version"] = kSchemaVersion;
    a.json["experiment"] = kind;
    a.json["config"] = cfg.path;
    a.json["seed"] = seed;
    return a;
}

// Cylinder masses of every length up to L sum to one.
inline Artifact run_gibbs(const ExperimentConfig& cfg, std::uint64_t seed, unsigned) {
    Artifact a = start_artifact("gibbs", cfg, seed);
    const KvSection s = cfg.section("gibbs");
    const MarkovGibbs mg = cfg.gibbs();
    const std::size_t len = positive(s, "cylinder_length", 8);
    const double tol = s.num("tolerance", 1e-10);
    a.table.header = {"length", "words", "mass_sum", "abs_error"};
    double worst = 0.0;
    for (std::size_t n = 1; n <= len; ++n) {
        CompensatedSum total;
        const auto words = mg.matrix().words(n);
        for (const Word& w : words) total.add(mg.word_measure(w));
        const double err = std::fabs(total.value() - 1.0);
        worst = std::max(worst, err);
        a.table.add({std::to_string(n), std::to_string(words.size()), fmt(total.value(), 17), fmt(err, 6)});
    }
    a.json["lambda"] = mg.lambda();
    a.json["log_lambda"] = std::log(mg.lambda());
    a.json["pf_iterations"] = mg.pf_iterations();
    a.json["block_length"] = mg.block_length();
    Json blocks = Json::array();
    for (std::size_t b = 0; b < mg.block_count(); ++b)
        blocks.push_back({{"block", word_json(mg.block(b))}, {"stationary", mg.stationary()[b]}});
    a.json["blocks"] = blocks;
    a.json["max_mass_error"] = worst;
    a.json["tolerance"] = tol;
    a.pass = worst <= tol;
    if (!a.pass) a.diagnostic = "cylinder masses miss 1 by " + fmt(worst, 3) + " > " + fmt(tol, 3);
    a.json["pass"] = a.pass;
    return a;
}

// S_n / sqrt(n) against N(0, rho^2), unconditionally and given each listed past.
inline Artifact run_clt(const ExperimentConfig& cfg, std::uint64_t seed, unsigned threads) {
    Artifact a = start_artifact("clt", cfg, seed);
    const KvSection s = cfg.section("clt");
    const MarkovGibbs mg = cfg.gibbs();
    const Cocycle c = cfg.cocycle(mg);
    const long n = static_cast<long>(positive(s, "n", 10000));
    const std::size_t samples = positive(s, "samples", 100000);
    const double bound = s.num("ks_bound", 0.03);
    std::vector<Word> pasts;
    for (const KvEntry* e : s.all("past")) {
        Word w;
        for (const auto& tok : split_ws(e->value)) w.push_back(static_cast<Symbol>(parse_int(tok, e->where)));
        if (!mg.matrix().admissible(w)) throw ConfigError(e->where + ": past is not admissible");
        pasts.push_back(w);
    }
    std::vector<CltReport> reports;
    reports.push_back(clt_experiment(mg, c, n, samples, Rng::stream(seed, 0).next(), threads));
    if (!pasts.empty()) {
        const Cocycle past_only = reduce_to_past(c, mg).past;
        for (std::size_t i = 0; i < pasts.size(); ++i) {
            Word w = pasts[i];
            if (w.size() < past_only.length()) throw ConfigError(s.at("past").where + ": past shorter than the cocycle window");
            reports.push_back(conditional_clt_experiment(mg, past_only, w, n, samples, Rng::stream(seed, i + 1).next(), threads));
        }
    }
    const GaussianRef g(reports.front().variance);
    a.table.header = {"run", "t", "empirical_cdf", "gaussian_cdf"};
    Json runs = Json::array();
    a.pass = true;
    for (std::size_t r = 0; r < reports.size(); ++r) {
        const CltReport& rep = reports[r];
        for (int k = -40; k <= 40; ++k) {
            const double t = 0.1 * k * g.sd();
            const auto below = std::upper_bound(rep.normalized.begin(), rep.normalized.end(), t) - rep.normalized.begin();
            a.table.add({std::to_string(r), fmt(t), fmt(static_cast<double>(below) / static_cast<double>(rep.normalized.size())),
                         fmt(g.cdf(t))});
        }
        Json j;
        j["past"] = r == 0 ? Json() : word_json(pasts[r - 1]);
        j["ks"] = rep.ks;
        j["p_value"] = rep.p_value;
        j["green_kubo_variance"] = rep.variance;
        j["empirical_variance"] = rep.empirical_variance;
        runs.push_back(j);
        if (rep.ks > bound) {
            a.pass = false;
            a.diagnostic += (a.diagnostic.empty() ? "" : "; ") + std::string("run ") + std::to_string(r) + ": KS " +
                            fmt(rep.ks, 4) + " > " + fmt(bound, 4);
        }
    }
    a.json["n"] = n;
    a.json["samples"] = samples;
    a.json["ks_bound"] = bound;
    a.json["runs"] = runs;
    Json mutual = Json::array();
    for (std::size_t i = 1; i < reports.size(); ++i)
        for (std::size_t j = i + 1; j < reports.size(); ++j)
            mutual.push_back({{"runs", {i, j}}, {"sup_distance", two_sample_distance(reports[i].normalized, reports[j].normalized)}});
    a.json["conditional_sup_distances"] = mutual;
    a.json["pass"] = a.pass;
    Plot p{"CLT: empirical vs Gaussian CDF", "S_n / sqrt(n)", "CDF", {}, false, false};
    Series emp{"empirical", {}, {}, false}, gauss{"N(0, rho^2)", {}, {}, false};
    for (const auto& row : a.table.rows) {
        if (row[0] != "0") continue;
        emp.x.push_back(std::stod(row[1]));
        emp.y.push_back(std::stod(row[2]));
        gauss.x.push_back(std::stod(row[1]));
        gauss.y.push_back(std::stod(row[3]));
    }
    p.series = {emp, gauss};
    a.plot = p;
    return a;
}

// Normalized local probabilities over k x cylinder pairs; constant ratios
// are the mixing local limit theorem.
inline Artifact run_mllt(const ExperimentConfig& cfg, std::uint64_t seed, unsigned threads) {
    Artifact a = start_artifact("mllt", cfg, seed);
    const KvSection s = cfg.section("mllt");
    const MarkovGibbs mg = cfg.gibbs();
    const Cocycle c = cfg.cocycle(mg);
    const long n = static_cast<long>(positive(s, "n", 400));
    const std::size_t samples = positive(s, "samples", 1000000);
    const auto ks = numbers(s, "k", {-1.0, 0.0, 1.0});
    const auto iv = numbers(s, "interval", {-1.0, 1.0});
    if (iv.size() != 2 || !(iv[0] < iv[1])) throw ConfigError(s.at("interval").where + ": interval needs lo < hi");
    const double bound = s.num("spread_bound", 1.2);
    std::vector<CylinderPair> pairs;
    for (const KvEntry* e : s.all("pair")) {
        auto [first, second] = parse_word_pair(*e);
        if (!first.empty() && !mg.matrix().admissible(first)) throw ConfigError(e->where + ": first word not admissible");
        if (!second.empty() && !mg.matrix().admissible(second)) throw ConfigError(e->where + ": second word not admissible");
        pairs.push_back({first, second});
    }
    if (pairs.empty()) pairs.push_back({{}, {}});
    const MlltSurface surf = mllt_surface(mg, c, ks, pairs, iv[0], iv[1], n, samples, seed, threads);
    a.table.header = {"k", "first", "second", "lo", "hi", "n", "hits", "samples", "estimate", "ratio", "ratio_low", "ratio_high"};
    Series pts{"ratio", {}, {}, true};
    for (std::size_t i = 0; i < surf.cells.size(); ++i) {
        const MlltCell& m = surf.cells[i];
        a.table.add({fmt(m.k), to_string(m.pair.first), to_string(m.pair.second), fmt(m.lo), fmt(m.hi), std::to_string(m.n),
                     std::to_string(m.hits), std::to_string(m.samples), fmt(m.estimate), fmt(m.ratio), fmt(m.ratio_low),
                     fmt(m.ratio_high)});
        pts.x.push_back(static_cast<double>(i));
        pts.y.push_back(m.ratio);
    }
    a.json["n"] = n;
    a.json["samples"] = samples;
    a.json["variance"] = surf.variance;
    a.json["aperiodicity"] = to_string(surf.verdict);
    a.json["spread"] = surf.spread();
    a.json["conservative_spread"] = surf.conservative_spread();
    a.json["spread_bound"] = bound;
    a.pass = surf.spread() <= bound;
    if (!a.pass) a.diagnostic = "ratio spread " + fmt(surf.spread(), 4) + " exceeds " + fmt(bound, 4);
    a.json["pass"] = a.pass;
    a.plot = Plot{"MLLT ratios per cell", "cell", "ratio", {pts}, false, false};
    return a;
}

// Rigidity-tower witness for conditions (A), (B), (C), plus the control with
// a halved delta that must fail (A).
inline Artifact run_qe(const ExperimentConfig& cfg, std::uint64_t seed, unsigned threads) {
    Artifact a = start_artifact("qe-verify", cfg, seed);
    const KvSection s = cfg.section("qe");
    const SpecialFlow f = cfg.flow();
    if (!f.base().is_rotation()) throw ConfigError(cfg.path + ": qe-verify needs a rotation base");
    const std::size_t level = positive(s, "level", 6);
    const long long repeats = static_cast<long long>(positive(s, "repeats", 1));
    const double tol = s.num("overlap_tolerance", 0.7), margin = s.num("margin", 0.05), eps = s.num("epsilon", 0.05);
    const std::size_t pairs = positive(s, "pairs", 1000);
    const auto towers = rigidity_towers(f, level);
    const QuasiEllipticWitness w = witness_from_towers(f, {towers.back()}, {repeats}, tol, margin);
    Json tj = Json::array();
    for (const TowerSpec& t : towers)
        tj.push_back({{"level", t.level}, {"q", t.q}, {"base_length", t.base_length}, {"height", t.height},
                      {"return_overlap", t.return_overlap}, {"max_diam", t.max_diam}});
    a.json["towers"] = tj;
    a.json["warnings"] = w.warnings;
    if (w.levels.empty()) {
        a.diagnostic = "no usable witness level: " + (w.warnings.empty() ? std::string("?") : w.warnings.front());
        a.json["pass"] = false;
        return a;
    }
    const WitnessLevel& l = w.levels.front();
    WitnessLevel bad = l;
    bad.delta /= 2.0;
    const auto good = verify_quasi_elliptic(f, l, w.margin, pairs, eps, seed, threads);
    const auto ctrl = verify_quasi_elliptic(f, bad, w.margin, pairs, eps, seed, threads);
    a.table.header = {"witness", "delta", "pairs", "pass_a", "pass_b", "pass_c", "worst_a", "worst_c", "measure_n"};
    using Row = std::tuple<const char*, const WitnessLevel*, const QuasiEllipticReport*>;
    for (auto [name, lev, r] : {Row{"tower", &l, &good}, Row{"halved_delta", &bad, &ctrl}})
        a.table.add({name, fmt(lev->delta), std::to_string(r->pairs), fmt(r->pass_a), fmt(r->pass_b), fmt(r->pass_c),
                     fmt(r->worst_a), fmt(r->worst_c), fmt(r->measure_n)});
    a.json["witness"] = {{"level", l.tower.level}, {"repeats", l.repeats}, {"a", l.a}, {"b", l.b}, {"delta", l.delta},
                         {"kept_fraction", l.kept_fraction}, {"margin", w.margin}};
    a.json["report"] = {{"pass_a", good.pass_a}, {"pass_b", good.pass_b}, {"pass_c", good.pass_c},
                        {"worst_a", good.worst_a}, {"worst_c", good.worst_c}, {"measure_n", good.measure_n}};
    a.json["control_pass_a"] = ctrl.pass_a;
    a.pass = good.pass_a == 1.0 && good.pass_b == 1.0 && good.pass_c == 1.0 && ctrl.pass_a < 1.0;
    if (!a.pass)
        a.diagnostic = "rates (A) " + fmt(good.pass_a, 4) + " (B) " + fmt(good.pass_b, 4) + " (C) " + fmt(good.pass_c, 4) +
                       ", control (A) " + fmt(ctrl.pass_a, 4);
    a.json["pass"] = a.pass;
    return a;
}

// Boundary mass of Q against eta (log-log slope) and coding separation under K_{t0}.
inline Artifact run_partition(const ExperimentConfig& cfg, std::uint64_t seed, unsigned) {
    Artifact a = start_artifact("partition", cfg, seed);
    const KvSection s = cfg.section("partition");
    const SpecialFlow f = cfg.flow();
    const FiberPartition q = cfg.partition(f);
    const auto etas = numbers(s, "eta", {1e-2, 1e-3, 1e-4});
    for (double e : etas)
        if (!(e > 0.0)) throw ConfigError(s.at("eta").where + ": eta must be positive");
    const std::size_t samples = positive(s, "samples", 1000000), pairs = positive(s, "pairs", 100);
    const long horizon = static_cast<long>(positive(s, "horizon", 100000));
    const double lo = s.num("slope_low", 0.8), hi = s.num("slope_high", 1.2);
    a.table.header = {"eta", "mass", "ci_low", "ci_high"};
    std::vector<double> lx, ly;
    Series pts{"boundary mass", {}, {}, true};
    for (std::size_t i = 0; i < etas.size(); ++i) {
        Rng rng = Rng::stream(seed, i);
        const MassEstimate m = boundary_mass(f, q, etas[i], samples, rng);
        a.table.add({fmt(etas[i]), fmt(m.estimate), fmt(m.ci_low), fmt(m.ci_high)});
        if (m.estimate > 0.0) {
            lx.push_back(std::log(etas[i]));
            ly.push_back(std::log(m.estimate));
            pts.x.push_back(etas[i]);
            pts.y.push_back(m.estimate);
        }
    }
    double slope = std::nan("");
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i] / lx.size(), my += ly[i] / ly.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
        slope = sxy / sxx;
    }
    std::optional<double> t0;
    if (s.has("t0")) t0 = s.num("t0");
    const ErgodicTimeReport et = pick_ergodic_time(f, t0, 200000);
    const double t = et.flagged && et.alternative ? *et.alternative : et.t0;
    Rng rng = Rng::stream(seed, etas.size());
    std::size_t separated = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
        FlowPoint p = f.sample(rng), r = f.sample(rng);
        separated += separation_time(f, q, t, p, r, horizon).has_value() ? 1 : 0;
    }
    a.json["atoms"] = q.size();
    a.json["measures"] = q.measures();
    a.json["slope"] = slope;
    a.json["slope_range"] = {lo, hi};
    a.json["t0"] = t;
    a.json["t0_flagged"] = et.flagged;
    a.json["separated_pairs"] = separated;
    a.json["pairs"] = pairs;
    a.pass = slope >= lo && slope <= hi && separated == pairs;
    if (!a.pass)
        a.diagnostic = "slope " + fmt(slope, 4) + " (want [" + fmt(lo) + ", " + fmt(hi) + "]), separated " +
                       std::to_string(separated) + "/" + std::to_string(pairs);
    a.json["pass"] = a.pass;
    a.plot = Plot{"boundary mass of Q", "eta", "mass", {pts}, true, true};
    return a;
}

// Per-atom d-bar between conditional and unconditional names over n; the
// verdict is taken at the largest n.
inline Artifact run_vwb(const ExperimentConfig& cfg, std::uint64_t seed, unsigned threads) {
    Artifact a = start_artifact("vwb", cfg, seed);
    const KvSection s = cfg.section("vwb");
    const SkewSystem sys = cfg.system();
    VwbOptions opt;
    opt.atoms = positive(s, "atoms", static_cast<long long>(opt.atoms));
    opt.samples = positive(s, "samples", static_cast<long long>(opt.samples));
    opt.depth = positive(s, "depth", static_cast<long long>(opt.depth));
    opt.steer_limit = positive(s, "steer_limit", static_cast<long long>(opt.steer_limit));
    opt.epsilon = s.num("epsilon", opt.epsilon);
    opt.align_horizon = s.num("align_horizon", opt.align_horizon);
    opt.align_tol = s.num("align_tol", opt.align_tol);
    opt.theta_tol = s.num("theta_tol", opt.theta_tol);
    if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0)) throw ConfigError(cfg.path + ": [vwb] epsilon must lie in (0, 1)");
    std::vector<std::size_t> ns;
    for (double v : numbers(s, "n", {16, 64, 256})) {
        if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError(s.at("n").where + ": n must be positive integers");
        ns.push_back(static_cast<std::size_t>(v));
    }
    a.table.header = {"n", "atom", "dbar", "assignment", "mean_coalescence", "never_coalesced", "aligned"};
    Json runs = Json::array();
    Series med{"median d-bar", {}, {}, false};
    double lowest = HUGE_VAL, frozen = 0.0;
    bool last_pass = false;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const VwbReport r = vwb_experiment(sys, ns[i], opt, Rng::stream(seed, i).next(), threads);
        double mn = HUGE_VAL;
        for (std::size_t k = 0; k < r.atoms.size(); ++k) {
            const VwbAtomReport& at = r.atoms[k];
            a.table.add({std::to_string(ns[i]), std::to_string(k), fmt(at.dbar), fmt(at.assignment.value),
                         fmt(at.mean_coalescence), fmt(at.never_coalesced), fmt(at.aligned)});
            mn = std::min(mn, at.dbar);
        }
        lowest = std::min(lowest, mn);
        frozen = r.frozen_bound;
        last_pass = r.pass;
        runs.push_back({{"n", ns[i]}, {"median", r.median}, {"min", mn}, {"bad_fraction", r.bad_fraction}, {"pass", r.pass}});
        med.x.push_back(static_cast<double>(ns[i]));
        med.y.push_back(r.median);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < med.y.size(); ++i) decreasing = decreasing && med.y[i] < med.y[i - 1];
    a.json["atoms"] = opt.atoms;
    a.json["samples"] = opt.samples;
    a.json["epsilon"] = opt.epsilon;
    a.json["partition_atoms"] = sys.partition().size();
    a.json["frozen_bound"] = frozen;
    a.json["runs"] = runs;
    a.json["median_strictly_decreasing"] = decreasing;
    a.pass = last_pass;
    if (!a.pass) {
        if (lowest >= frozen - 0.05)
            a.diagnostic = "frozen fiber: every per-atom d-bar stays at or above 1 - max_j nu(Q_j) - 0.05 = " +
                           fmt(frozen - 0.05, 4) + " (lowest " + fmt(lowest, 4) +
                           "); the fiber flow never moves conditional names off their starting atom";
        else
            a.diagnostic = "atoms with d-bar >= " + fmt(opt.epsilon) + " carry mass " +
                           fmt(runs.back()["bad_fraction"].get<double>(), 4) + " at n = " + std::to_string(ns.back());
    }
    a.json["pass"] = a.pass;
    a.plot = Plot{"VWB: median per-atom d-bar", "n", "d-bar", {med}, true, false};
    return a;
}

inline MatchOptions match_options(const KvSection& s) {
    MatchOptions o;
    o.epsilon = s.num("epsilon", o.epsilon);
    o.a = s.num("a", o.a);
    o.c = s.num("c", o.c);
    o.xi = s.num("xi", o.xi);
    o.n1 = static_cast<long long>(positive(s, "n1", o.n1));
    o.hat_ratio = s.num("hat_ratio", o.hat_ratio);
    o.ratio_bound = s.num("ratio_bound", o.ratio_bound);
    o.agreement = s.num("agreement", o.agreement);
    return o;
}

// The matching construction between two atoms with the surrogate ledger.
inline Artifact run_match(const ExperimentConfig& cfg, std::uint64_t seed, unsigned threads) {
    Artifact a = start_artifact("match-demo", cfg, seed);
    const KvSection s = cfg.section("match");
    const SkewSystem sys = cfg.system();
    if (!sys.cocycle().past_only()) throw ConfigError(cfg.path + ": match-demo needs a cocycle with window hi = 0");
    const MatchOptions opt = match_options(s);
    const std::size_t level = positive(s, "level", 7), samples = positive(s, "samples", 500000),
                      verify = positive(s, "verify", 1000);
    const double variance = green_kubo_variance(sys.cocycle(), sys.gibbs()).variance;
    const double k0 = clt_multiplier(variance, opt.epsilon);
    const auto witness = matching_witness(sys.flow(), level, k0, opt);
    const MatchParams p = choose_params(opt, witness, variance, match_block_radius(sys));
    const MatchRun run = run_matching(sys, p, samples, verify, seed, threads);
    Json ledger = Json::array();
    for (const LedgerEntry& e : p.ledger)
        ledger.push_back({{"relation", e.relation}, {"surrogate", e.surrogate}, {"lhs", e.lhs}, {"rhs", e.rhs},
                          {"holds", e.holds}, {"enforced", e.enforced}});
    a.json["params"] = {{"epsilon", p.epsilon}, {"a", p.a}, {"c", p.c}, {"xi", p.xi}, {"variance", p.variance},
                        {"k0", p.k0}, {"n1", p.n1}, {"n2", p.n2}, {"n_hat", p.n_hat},
                        {"block_radius", p.block_radius}, {"bin_width", p.bin_width}, {"agreement", p.agreement},
                        {"level", p.level.tower.level}, {"repeats", p.level.repeats}, {"a_i", p.level.a},
                        {"b_i", p.level.b}, {"delta_i", p.level.delta}};
    a.json["ledger"] = ledger;
    a.json["atoms"] = {{"past_a", word_json(run.atom_a.past)}, {"y_a", {run.atom_a.y.x, run.atom_a.y.s}},
                       {"past_b", word_json(run.atom_b.past)}, {"y_b", {run.atom_b.y.x, run.atom_b.y.s}}};
    const MatchingPlan& pl = run.plan;
    a.json["plan"] = {{"ell", pl.ell}, {"pairs", pl.pairs.size()}, {"samples", pl.samples_a}, {"buckets", pl.buckets},
                      {"tail_a", pl.tail_a}, {"tail_b", pl.tail_b}, {"excess_a", pl.excess_a}, {"excess_b", pl.excess_b},
                      {"matched_mass", pl.matched_mass()}, {"discarded_mass", pl.discarded_mass()}};
    a.json["bound"] = {{"tail", run.bound.tail}, {"excess", run.bound.excess}, {"total", run.bound.total}};
    const MatchVerification& v = run.verification;
    a.json["verification"] = {{"pairs", v.checks.size()}, {"all_shared_tails", v.all_shared_tails},
                              {"max_abs_theta", v.max_abs_theta}, {"max_drift", v.max_drift},
                              {"mean_agreement", v.mean_agreement}, {"good_fraction", v.good_fraction},
                              {"boundary_clear_fraction", v.boundary_clear_fraction}};
    a.table.header = {"pair", "shared_tail", "shared_block", "theta", "drift", "agreement", "boundary_clear"};
    Series ag{"agreement", {}, {}, true};
    for (std::size_t i = 0; i < v.checks.size(); ++i) {
        const PairCheck& c = v.checks[i];
        a.table.add({std::to_string(i), c.shared_tail ? "1" : "0", c.shared_block ? "1" : "0", fmt(c.theta), fmt(c.drift),
                     fmt(c.agreement), c.boundary_clear ? "1" : "0"});
        ag.x.push_back(static_cast<double>(i));
        ag.y.push_back(c.agreement);
    }
    a.pass = run.pass;
    if (!a.pass)
        a.diagnostic = "shared tails " + std::string(v.all_shared_tails ? "yes" : "no") + ", max |theta| " +
                       fmt(v.max_abs_theta, 4) + " (bin " + fmt(p.bin_width, 4) + "), drift " + fmt(v.max_drift, 4) +
                       ", discarded " + fmt(pl.discarded_mass(), 4) + " vs 2 x bound " + fmt(2 * run.bound.total, 4) +
                       ", good pairs " + fmt(v.good_fraction, 4);
    a.json["pass"] = a.pass;
    a.plot = Plot{"matched pairs: same-atom agreement", "pair", "agreement", {ag}, false, false};
    return a;
}

// d-bar between Bernoulli(p) and Bernoulli(q) names; the known value is |p - q|.
inline Artifact run_dbar(const ExperimentConfig& cfg, std::uint64_t seed, unsigned) {
    Artifact a = start_artifact("dbar", cfg, seed);
    const KvSection s = cfg.section("dbar");
    const double p = s.num("p", 0.5), q = s.num("q", 0.6), tol = s.num("tolerance", 0.04);
    if (!(p >= 0 && p <= 1 && q >= 0 && q <= 1)) throw ConfigError(cfg.path + ": [dbar] p and q must lie in [0, 1]");
    const std::size_t n = positive(s, "n", 16), names = positive(s, "names", 512);
    auto [ca, cb] = coupled_bernoulli_names(p, q, n, names, Rng::stream(seed, 0).next());
    Rng rng = Rng::stream(seed, 1);
    const EmpiricalNames ia = bernoulli_names(p, n, names, rng), ib = bernoulli_names(q, n, names, rng);
    const DbarResult coupled = dbar_names(ca, cb), independent = dbar_names(ia, ib), paired = paired_cost(ca, cb);
    a.table.header = {"sampling", "method", "value", "ci_low", "ci_high"};
    for (auto [name, r] : {std::pair{"coupled", &coupled}, std::pair{"independent", &independent},
                           std::pair{"coupled_pairs", &paired}})
        a.table.add({name, to_string(r->method), fmt(r->value), fmt(r->ci_low), fmt(r->ci_high)});
    const double exact = std::fabs(p - q);
    a.json["p"] = p;
    a.json["q"] = q;
    a.json["n"] = n;
    a.json["names"] = names;
    a.json["exact"] = exact;
    a.json["coupled_assignment"] = coupled.value;
    a.json["independent_assignment"] = independent.value;
    a.json["coupled_pairs"] = paired.value;
    a.json["tolerance"] = tol;
    a.pass = std::fabs(coupled.value - exact) <= tol;
    if (!a.pass) a.diagnostic = "d-bar " + fmt(coupled.value, 4) + " misses |p - q| = " + fmt(exact, 4) + " by more than " + fmt(tol);
    a.json["pass"] = a.pass;
    return a;
}

}  // namespace skewlab
