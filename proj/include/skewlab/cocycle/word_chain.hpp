#pragma once

#include <unordered_map>
#include <vector>

#include "skewlab/cocycle/cocycle.hpp"
#include "skewlab/sft/gibbs.hpp"

namespace skewlab {

// The Gibbs chain lifted to admissible words of length L >= block length.
// State at time t is the word x_{t-L+1} .. x_t, so any cocycle whose window
// fits in L symbols becomes a plain function of the state.
class WordChain {
public:
    WordChain(const MarkovGibbs& mg, std::size_t len) : mg_(&mg), len_(std::max(len, mg.block_length())) {
        words_ = mg.matrix().words(len_);
        for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(code(words_[i]), i);
        const std::size_t b = mg.block_length();
        begin_.assign(words_.size() + 1, 0);
        for (std::size_t u = 0; u < words_.size(); ++u) {
            begin_[u] = to_.size();
            const std::size_t bu = *mg.find_block(words_[u].data() + len_ - b);
            Word next(words_[u].begin() + 1, words_[u].end());
            next.push_back(0);
            double acc = 0.0;
            for (std::size_t e = mg.successor_begin(bu); e < mg.successor_end(bu); ++e) {
                next.back() = mg.last_symbol(mg.successor(e));
                to_.push_back(index_.at(code(next)));
                prob_.push_back(mg.successor_probability(e));
                cum_.push_back(acc += mg.successor_probability(e));
            }
        }
        begin_.back() = to_.size();
        pi_.resize(words_.size());
        double acc = 0.0;
        for (std::size_t u = 0; u < words_.size(); ++u) {
            pi_[u] = mg.word_measure(words_[u]);
            pi_cum_.push_back(acc += pi_[u]);
        }
    }

    const MarkovGibbs& gibbs() const { return *mg_; }
    std::size_t word_length() const { return len_; }
    std::size_t size() const { return words_.size(); }
    const Word& word(std::size_t u) const { return words_[u]; }
    const std::vector<double>& stationary() const { return pi_; }
    std::size_t begin(std::size_t u) const { return begin_[u]; }
    std::size_t end(std::size_t u) const { return begin_[u + 1]; }
    std::size_t target(std::size_t e) const { return to_[e]; }
    double probability(std::size_t e) const { return prob_[e]; }

    std::size_t state(const Word& w) const {
        auto it = index_.find(code(w));
        if (w.size() != len_ || it == index_.end()) throw DomainError("word is not an admissible chain state");
        return it->second;
    }

    std::size_t step(std::size_t u, Rng& rng) const {
        const std::size_t b = begin_[u], e = begin_[u + 1];
        if (e - b == 1) return to_[b];
        return to_[b + draw_cumulative(&cum_[b], e - b, rng.uniform())];
    }

    std::size_t sample_stationary(Rng& rng) const {
        return draw_cumulative(pi_cum_.data(), pi_cum_.size(), rng.uniform());
    }

    // State for the last L symbols of a past; shorter pasts are completed on
    // the left from the stationary law.
    std::size_t state_after(const Word& past, Rng& rng) const {
        require(!past.empty(), "past must be nonempty");
        if (past.size() >= len_) return state(Word(past.end() - static_cast<long>(len_), past.end()));
        std::vector<double> cum;
        std::vector<std::size_t> ids;
        double acc = 0.0;
        for (std::size_t u = 0; u < words_.size(); ++u)
            if (std::equal(past.begin(), past.end(), words_[u].end() - static_cast<long>(past.size()))) {
                cum.push_back(acc += pi_[u]);
                ids.push_back(u);
            }
        if (ids.empty()) throw DomainError("past is not admissible");
        return ids[draw_cumulative(cum.data(), cum.size(), rng.uniform())];
    }

    // Cocycle value per state (window must fit in the word; the value is
    // read from the last symbols, i.e. c at time t - hi).
    std::vector<double> values(const Cocycle& c) const {
        require(c.length() <= len_, "cocycle window longer than chain words");
        std::vector<double> v(words_.size());
        for (std::size_t u = 0; u < words_.size(); ++u)
            v[u] = c(Word(words_[u].end() - static_cast<long>(c.length()), words_[u].end()));
        return v;
    }

    std::vector<double> dense() const {
        const std::size_t n = size();
        std::vector<double> p(n * n, 0.0);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t e = begin_[u]; e < begin_[u + 1]; ++e) p[u * n + to_[e]] += prob_[e];
        return p;
    }

private:
    std::uint64_t code(const Word& w) const {
        std::uint64_t c = 0;
        for (Symbol s : w) c = c * mg_->alphabet() + s;
        return c;
    }

    const MarkovGibbs* mg_;
    std::size_t len_;
    std::vector<Word> words_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
    std::vector<std::size_t> begin_, to_;
    std::vector<double> prob_, cum_, pi_, pi_cum_;
};

}  // namespace skewlab
