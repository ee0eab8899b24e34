#pragma once

#include "skewlab/cocycle/cocycle.hpp"
#include "skewlab/sft/io.hpp"

namespace skewlab {

// Cocycle section:
//   window = -2 0          (coordinates lo hi)
//   value = 0 0 1 : 0.5    (one line per admissible word; missing words are an error)
//   default = 0            (optional value for words without a line)
inline Cocycle read_cocycle(const KvSection& s, const TransitionMatrix& a) {
    const auto& we = s.at("window");
    const auto bounds = split_ws(we.value);
    if (bounds.size() != 2) throw ConfigError(we.where + ": window needs 'lo hi'");
    Cocycle c;
    c.lo = parse_int(bounds[0], we.where);
    c.hi = parse_int(bounds[1], we.where);
    if (c.lo > 0 || c.hi < 0) throw ConfigError(we.where + ": window must contain coordinate 0");
    for (const KvEntry* e : s.all("value")) {
        auto [w, v] = parse_word_value(*e);
        if (w.size() != c.length()) throw ConfigError(e->where + ": word length differs from the window");
        if (!a.admissible(w)) throw ConfigError(e->where + ": word is not admissible");
        c.table[w] = parse_double(v, e->where);
    }
    if (auto* d = s.find("default")) {
        const double v = parse_double(d->value, d->where);
        for (const Word& w : a.words(c.length())) c.table.emplace(w, v);
    }
    try {
        c.validate(a);
    } catch (const DomainError& err) {
        throw ConfigError(s.source + ": [" + s.name + "] " + err.what());
    }
    return c;
}

}  // namespace skewlab
