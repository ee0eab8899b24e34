#pragma once

#include <string>
#include <utility>

#include "skewlab/core/kv.hpp"
#include "skewlab/sft/gibbs.hpp"

namespace skewlab {

// "0 1 1 : 0.25" -> ({0,1,1}, "0.25")
inline std::pair<Word, std::string> parse_word_value(const KvEntry& e) {
    const auto colon = e.value.find(':');
    if (colon == std::string::npos) throw ConfigError(e.where + ": expected 'symbols : value'");
    Word w;
    for (const auto& tok : split_ws(e.value.substr(0, colon))) {
        const long long s = parse_int(tok, e.where);
        if (s < 0 || s > 65535) throw ConfigError(e.where + ": symbol out of range");
        w.push_back(static_cast<Symbol>(s));
    }
    return {w, trim(e.value.substr(colon + 1))};
}

// System section:
//   alphabet = 2
//   row = 1 1            (one line per matrix row)
//   row = 1 0
//   potential_window = 1 (potential depends on x_0..x_window)
//   potential = 0 1 : 0.5
inline TransitionMatrix read_matrix(const KvSection& s) {
    const long long m = s.integer("alphabet");
    if (m < 1 || m > 65536) throw ConfigError(s.at("alphabet").where + ": alphabet size out of range");
    std::vector<std::vector<int>> rows;
    for (const KvEntry* e : s.all("row")) {
        std::vector<int> row;
        for (const auto& tok : split_ws(e->value)) row.push_back(static_cast<int>(parse_int(tok, e->where)));
        if (static_cast<long long>(row.size()) != m) throw ConfigError(e->where + ": row length differs from alphabet");
        rows.push_back(row);
    }
    if (rows.empty()) rows.assign(static_cast<std::size_t>(m), std::vector<int>(static_cast<std::size_t>(m), 1));
    if (static_cast<long long>(rows.size()) != m) throw ConfigError(s.source + ": [" + s.name + "] needs one row per symbol");
    try {
        return TransitionMatrix(rows);
    } catch (const DomainError& err) {
        throw ConfigError(s.source + ": [" + s.name + "] " + err.what());
    }
}

inline Potential read_potential(const KvSection& s) {
    Potential f;
    f.window = static_cast<std::size_t>(s.integer("potential_window", 1));
    for (const KvEntry* e : s.all("potential")) {
        auto [w, v] = parse_word_value(*e);
        if (w.size() != f.window + 1) throw ConfigError(e->where + ": potential word must have window+1 symbols");
        f.values[w] = parse_double(v, e->where);
    }
    return f;
}

inline MarkovGibbs read_gibbs(const KvSection& s) {
    TransitionMatrix a = read_matrix(s);
    Potential f = read_potential(s);
    try {
        return MarkovGibbs(a, f);
    } catch (const DomainError& err) {
        throw ConfigError(s.source + ": [" + s.name + "] " + err.what());
    }
}

}  // namespace skewlab
