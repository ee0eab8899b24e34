#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "skewlab/core/error.hpp"
#include "skewlab/core/rng.hpp"
#include "skewlab/sft/transition_matrix.hpp"
#include "skewlab/sft/word.hpp"

namespace skewlab {

// Locally constant potential f(x_0, ..., x_window). Words missing from the
// table contribute 0.
struct Potential {
    std::size_t window = 1;
    std::map<Word, double> values;

    double operator()(const Word& w) const {
        auto it = values.find(w);
        return it == values.end() ? 0.0 : it->second;
    }
};

struct Cylinder {
    long start = 0;
    Word symbols;
};

struct CylinderMass {
    double mass = 0.0;
    bool admissible = true;
    std::string reason;
};

// Stationary Markov data of a finite-range Gibbs measure, recoded as a
// one-step chain on admissible blocks of length `window`.
class MarkovGibbs {
public:
    static constexpr double kPfTolerance = 1e-14;
    static constexpr int kPfMaxIterations = 100000;

    MarkovGibbs(TransitionMatrix a, Potential f) : a_(std::move(a)), f_(std::move(f)) {
        require(f_.window >= 1, "potential window must be at least 1");
        for (const auto& [w, v] : f_.values) {
            require(w.size() == f_.window + 1, "potential word has the wrong length");
            require(std::isfinite(v), "potential value is not finite");
        }
        block_len_ = f_.window;
        blocks_ = a_.words(block_len_);
        for (std::size_t i = 0; i < blocks_.size(); ++i) index_.emplace(code(blocks_[i].data(), block_len_), i);
        build_edges();
        solve_perron_frobenius();
        build_transitions();
    }

    const TransitionMatrix& matrix() const { return a_; }
    const Potential& potential() const { return f_; }
    std::size_t alphabet() const { return a_.size(); }
    std::size_t block_length() const { return block_len_; }
    std::size_t block_count() const { return blocks_.size(); }
    const Word& block(std::size_t i) const { return blocks_[i]; }
    double lambda() const { return lambda_; }
    int pf_iterations() const { return iterations_; }
    const std::vector<double>& stationary() const { return pi_; }
    const std::vector<double>& right_vector() const { return right_; }
    const std::vector<double>& left_vector() const { return left_; }

    // Block index of symbols w[0..block_length), if admissible.
    std::optional<std::size_t> find_block(const Symbol* w) const {
        auto it = index_.find(code(w, block_len_));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<std::size_t> find_block(const Word& w) const {
        if (w.size() != block_len_) return std::nullopt;
        return find_block(w.data());
    }

    double transition(std::size_t u, std::size_t v) const {
        for (std::size_t e = succ_begin_[u]; e < succ_begin_[u + 1]; ++e)
            if (succ_to_[e] == v) return succ_prob_[e];
        return 0.0;
    }
    std::size_t successor_begin(std::size_t u) const { return succ_begin_[u]; }
    std::size_t successor_end(std::size_t u) const { return succ_begin_[u + 1]; }
    std::size_t successor(std::size_t e) const { return succ_to_[e]; }
    double successor_probability(std::size_t e) const { return succ_prob_[e]; }
    Symbol last_symbol(std::size_t block) const { return blocks_[block].back(); }

    // Dense transition matrix over blocks, row-major.
    std::vector<double> dense_transitions() const {
        const std::size_t n = blocks_.size();
        std::vector<double> p(n * n, 0.0);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t e = succ_begin_[u]; e < succ_begin_[u + 1]; ++e) p[u * n + succ_to_[e]] = succ_prob_[e];
        return p;
    }

    // One chain step from block u. Blocks with a single successor consume no
    // randomness.
    std::size_t step(std::size_t u, Rng& rng) const {
        const std::size_t b = succ_begin_[u], e = succ_begin_[u + 1];
        if (e - b == 1) return succ_to_[b];
        return succ_to_[b + draw_cumulative(&succ_cum_[b], e - b, rng.uniform())];
    }

    std::size_t sample_stationary_block(Rng& rng) const {
        return draw_cumulative(pi_cum_.data(), pi_cum_.size(), rng.uniform());
    }

    // Block consistent with the last symbols of `past`, drawn from the
    // stationary law when the past is shorter than a block.
    std::size_t terminal_block(const Word& past, Rng& rng) const {
        require(!past.empty(), "past must be nonempty");
        if (past.size() >= block_len_) {
            auto b = find_block(past.data() + past.size() - block_len_);
            if (!b) throw DomainError("past is not admissible");
            return *b;
        }
        std::vector<double> cum;
        std::vector<std::size_t> ids;
        double total = 0.0;
        const std::size_t k = past.size();
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            if (std::equal(past.begin(), past.end(), blocks_[i].end() - static_cast<long>(k))) {
                total += pi_[i];
                cum.push_back(total);
                ids.push_back(i);
            }
        }
        if (ids.empty()) throw DomainError("past is not admissible");
        return ids[draw_cumulative(cum.data(), cum.size(), rng.uniform())];
    }

    // Word of length n from the stationary law.
    Word sample_stationary(std::size_t n, Rng& rng) const {
        Word out;
        out.reserve(n);
        std::size_t u = sample_stationary_block(rng);
        for (std::size_t i = 0; i < block_len_ && out.size() < n; ++i) out.push_back(blocks_[u][i]);
        while (out.size() < n) {
            u = step(u, rng);
            out.push_back(last_symbol(u));
        }
        return out;
    }

    // Future x_1..x_n drawn from the conditional measure given the past.
    Word sample_future(const Word& past, std::size_t n, Rng& rng) const {
        if (!a_.admissible(past)) throw DomainError("past is not admissible");
        std::size_t u = terminal_block(past, rng);
        Word out;
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            u = step(u, rng);
            out.push_back(last_symbol(u));
        }
        return out;
    }

    double word_measure(const Word& w) const { return cylinder_measure(Cylinder{0, w}).mass; }

    CylinderMass cylinder_measure(const Cylinder& c) const {
        const Word& w = c.symbols;
        if (w.empty()) return {1.0, true, {}};
        for (Symbol s : w)
            if (s >= a_.size()) return {0.0, false, "symbol outside alphabet"};
        for (std::size_t i = 0; i + 1 < w.size(); ++i)
            if (!a_.allowed(w[i], w[i + 1]))
                return {0.0, false, "forbidden transition " + std::to_string(w[i]) + "->" + std::to_string(w[i + 1])};
        if (w.size() < block_len_) {
            double total = 0.0;
            for (std::size_t i = 0; i < blocks_.size(); ++i)
                if (std::equal(w.begin(), w.end(), blocks_[i].begin())) total += pi_[i];
            return {total, true, {}};
        }
        std::size_t u = *find_block(w.data());
        double mass = pi_[u];
        for (std::size_t i = block_len_; i < w.size(); ++i) {
            const std::size_t v = *find_block(w.data() + i + 1 - block_len_);
            mass *= transition(u, v);
            u = v;
        }
        return {mass, true, {}};
    }

    // Conditional probability of the future word x_1..x_s given the past's
    // terminal block.
    double conditional_word_measure(std::size_t block, const Word& future) const {
        double mass = 1.0;
        Word tail = blocks_[block];
        std::size_t u = block;
        for (Symbol s : future) {
            tail.erase(tail.begin());
            tail.push_back(s);
            auto v = find_block(tail);
            if (!v) return 0.0;
            const double p = transition(u, *v);
            if (p == 0.0) return 0.0;
            mass *= p;
            u = *v;
        }
        return mass;
    }

private:
    std::uint64_t code(const Symbol* w, std::size_t n) const {
        std::uint64_t c = 0;
        for (std::size_t i = 0; i < n; ++i) c = c * a_.size() + w[i];
        return c;
    }

    void build_edges() {
        if (std::pow(static_cast<double>(a_.size()), static_cast<double>(block_len_)) > 1.8e19)
            throw ResourceError("block coding overflows 64 bits");
        const std::size_t n = blocks_.size();
        succ_begin_.assign(n + 1, 0);
        Word ext(block_len_ + 1);
        for (std::size_t u = 0; u < n; ++u) {
            succ_begin_[u] = succ_to_.size();
            std::copy(blocks_[u].begin(), blocks_[u].end(), ext.begin());
            for (Symbol s = 0; s < a_.size(); ++s) {
                if (!a_.allowed(blocks_[u].back(), s)) continue;
                ext.back() = s;
                const std::size_t v = *find_block(ext.data() + 1);
                succ_to_.push_back(v);
                weight_.push_back(std::exp(f_(ext)));
            }
            if (succ_begin_[u] == succ_to_.size()) throw DomainError("block without admissible successor");
        }
        succ_begin_[n] = succ_to_.size();
    }

    // Perron-Frobenius data by power iteration on M + I, which is primitive
    // for irreducible M.
    void solve_perron_frobenius() {
        const std::size_t n = blocks_.size();
        auto iterate = [&](bool transpose, std::vector<double>& v) {
            v.assign(n, 1.0 / static_cast<double>(n));
            std::vector<double> w(n);
            for (int it = 1; it <= kPfMaxIterations; ++it) {
                w = v;
                for (std::size_t u = 0; u < n; ++u)
                    for (std::size_t e = succ_begin_[u]; e < succ_begin_[u + 1]; ++e) {
                        if (transpose)
                            w[succ_to_[e]] += weight_[e] * v[u];
                        else
                            w[u] += weight_[e] * v[succ_to_[e]];
                    }
                double total = 0.0;
                for (double x : w) total += x;
                double diff = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    w[i] /= total;
                    diff = std::max(diff, std::abs(w[i] - v[i]));
                }
                v.swap(w);
                if (diff < kPfTolerance) return it;
            }
            throw ResourceError("Perron-Frobenius iteration did not converge; ill-conditioned potential");
        };
        iterations_ = std::max(iterate(false, right_), iterate(true, left_));
        // lambda from the Rayleigh-type quotient sum(M r) / sum(r)
        double num = 0.0, den = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t e = succ_begin_[u]; e < succ_begin_[u + 1]; ++e) num += weight_[e] * right_[succ_to_[e]];
            den += right_[u];
        }
        lambda_ = num / den;
        pi_.resize(n);
        double z = 0.0;
        for (std::size_t u = 0; u < n; ++u) z += pi_[u] = left_[u] * right_[u];
        for (double& p : pi_) p /= z;
        pi_cum_.resize(n);
        double acc = 0.0;
        for (std::size_t u = 0; u < n; ++u) pi_cum_[u] = acc += pi_[u];
    }

    void build_transitions() {
        const std::size_t n = blocks_.size();
        succ_prob_.resize(succ_to_.size());
        succ_cum_.resize(succ_to_.size());
        for (std::size_t u = 0; u < n; ++u) {
            double row = 0.0;
            for (std::size_t e = succ_begin_[u]; e < succ_begin_[u + 1]; ++e)
                row += succ_prob_[e] = weight_[e] * right_[succ_to_[e]] / (lambda_ * right_[u]);
            double acc = 0.0;
            for (std::size_t e = succ_begin_[u]; e < succ_begin_[u + 1]; ++e) {
                succ_prob_[e] /= row;  // removes rounding drift only
                succ_cum_[e] = acc += succ_prob_[e];
            }
        }
    }

    TransitionMatrix a_;
    Potential f_;
    std::size_t block_len_ = 1;
    std::vector<Word> blocks_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
    std::vector<std::size_t> succ_begin_, succ_to_;
    std::vector<double> weight_, succ_prob_, succ_cum_;
    std::vector<double> right_, left_, pi_, pi_cum_;
    double lambda_ = 0.0;
    int iterations_ = 0;
};

inline MarkovGibbs gibbs_from_potential(const TransitionMatrix& a, const Potential& f) { return MarkovGibbs(a, f); }

inline MarkovGibbs parry_measure(const TransitionMatrix& a) { return MarkovGibbs(a, Potential{}); }

}  // namespace skewlab
