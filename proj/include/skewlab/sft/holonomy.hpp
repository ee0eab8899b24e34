#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "skewlab/sft/gibbs.hpp"

namespace skewlab {

inline std::size_t past_block(const MarkovGibbs& mg, const SymbolicWindow& w) {
    if (w.past.size() < mg.block_length()) throw DomainError("past shorter than the chain's block length");
    auto b = mg.find_block(w.past.data() + w.past.size() - mg.block_length());
    if (!b) throw DomainError("past is not admissible");
    return *b;
}

// mu+_{w1}(C) / mu+_{w2}(H C) for a future cylinder C = [x_1..x_s]. The
// holonomy keeps future coordinates, so H C is the same word seen from w2.
inline double holonomy_ratio(const MarkovGibbs& mg, const SymbolicWindow& w1, const SymbolicWindow& w2,
                             const Word& future) {
    if (w1.at(0) != w2.at(0)) throw DomainError("pasts differ at coordinate 0; holonomy undefined");
    const double num = mg.conditional_word_measure(past_block(mg, w1), future);
    const double den = mg.conditional_word_measure(past_block(mg, w2), future);
    if (num == 0.0 && den == 0.0) throw DomainError("cylinder is not admissible after the past");
    return num / den;
}

struct HolonomyBound {
    std::size_t agreement;  // pasts agree on coordinates -agreement+1..0
    double delta;           // D2 scale 2^-agreement of that agreement
    double epsilon;         // max |ratio - 1|
};

// Worst holonomy defect for each agreement depth, over all pairs of blocks
// and all future cylinders of length <= max_len.
inline std::vector<HolonomyBound> holonomy_epsilon_table(const MarkovGibbs& mg, std::size_t max_len = 8) {
    const std::size_t b = mg.block_length();
    std::vector<HolonomyBound> table;
    for (std::size_t d = 1; d <= b; ++d) {
        double eps = 0.0;
        for (std::size_t u = 0; u < mg.block_count(); ++u)
            for (std::size_t v = u + 1; v < mg.block_count(); ++v) {
                const Word& bu = mg.block(u);
                const Word& bv = mg.block(v);
                if (!std::equal(bu.end() - static_cast<long>(d), bu.end(), bv.end() - static_cast<long>(d))) continue;
                for (std::size_t len = 1; len <= max_len; ++len) {
                    for (const Word& w : mg.matrix().words(len)) {
                        if (!mg.matrix().allowed(bu.back(), w.front())) continue;
                        const double pu = mg.conditional_word_measure(u, w);
                        const double pv = mg.conditional_word_measure(v, w);
                        eps = std::max(eps, std::abs(pu / pv - 1.0));
                    }
                }
            }
        table.push_back({d, std::ldexp(1.0, -static_cast<int>(d)), eps});
    }
    return table;
}

}  // namespace skewlab
