#pragma once

#include <cstdint>
#include <vector>

#include "skewlab/core/error.hpp"
#include "skewlab/sft/word.hpp"

namespace skewlab {

// True iff every symbol reaches every other along admissible transitions.
inline bool check_irreducible(const std::vector<std::vector<int>>& a) {
    const std::size_t m = a.size();
    if (m == 0) throw DomainError("empty alphabet");
    for (const auto& row : a)
        if (row.size() != m) throw DomainError("transition matrix is not square");
    for (std::size_t s = 0; s < m; ++s) {
        std::vector<char> seen(m, 0);
        std::vector<std::size_t> stack{s};
        std::size_t reached = 0;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < m; ++v)
                if (a[u][v] && !seen[v]) {
                    seen[v] = 1;
                    ++reached;
                    stack.push_back(v);
                }
        }
        if (reached != m) return false;
    }
    return true;
}

class TransitionMatrix {
public:
    TransitionMatrix() = default;

    explicit TransitionMatrix(std::vector<std::vector<int>> rows) : rows_(std::move(rows)) {
        if (rows_.size() > 65536) throw DomainError("alphabet larger than 2^16");
        for (const auto& row : rows_)
            for (int e : row)
                if (e != 0 && e != 1) throw DomainError("transition matrix entries must be 0 or 1");
        if (!check_irreducible(rows_)) throw DomainError("transition matrix is not irreducible");
    }

    static TransitionMatrix full(std::size_t m) {
        return TransitionMatrix(std::vector<std::vector<int>>(m, std::vector<int>(m, 1)));
    }
    static TransitionMatrix golden_mean() { return TransitionMatrix({{1, 1}, {1, 0}}); }

    std::size_t size() const { return rows_.size(); }
    bool allowed(Symbol a, Symbol b) const { return rows_[a][b] != 0; }
    const std::vector<std::vector<int>>& rows() const { return rows_; }

    bool admissible(const Word& w) const {
        for (Symbol s : w)
            if (s >= size()) return false;
        for (std::size_t i = 0; i + 1 < w.size(); ++i)
            if (!allowed(w[i], w[i + 1])) return false;
        return true;
    }

    // All admissible words of length n, in lexicographic order.
    std::vector<Word> words(std::size_t n) const {
        std::vector<Word> out;
        if (n == 0) return {Word{}};
        Word w(n);
        extend(w, 0, out);
        return out;
    }

private:
    void extend(Word& w, std::size_t pos, std::vector<Word>& out) const {
        for (Symbol s = 0; s < size(); ++s) {
            if (pos > 0 && !allowed(w[pos - 1], s)) continue;
            w[pos] = s;
            if (pos + 1 == w.size())
                out.push_back(w);
            else
                extend(w, pos + 1, out);
        }
    }

    std::vector<std::vector<int>> rows_;
};

}  // namespace skewlab
