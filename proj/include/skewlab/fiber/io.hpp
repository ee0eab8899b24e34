#pragma once

#include "skewlab/core/kv.hpp"
#include "skewlab/fiber/continued_fraction.hpp"
#include "skewlab/fiber/special_flow.hpp"

namespace skewlab {

// Fiber section:
//   base = rotation           alpha = 0.618...   or   quotients = 1 1 1 250
//   base = iet                lengths = 0.3 0.7  permutation = 1 0
//   roof = 1                  (constant)   or   piece = lo hi a b   (a + b x on [lo,hi))
inline SpecialFlow read_flow(const KvSection& s) {
    try {
        const std::string kind = s.str("base", "rotation");
        BaseMap base = BaseMap::rotation(0.0);
        if (kind == "rotation") {
            if (s.has("quotients")) {
                std::vector<long long> head;
                for (const auto& tok : split_ws(s.at("quotients").value)) head.push_back(parse_int(tok, s.at("quotients").where));
                base = BaseMap::rotation(alpha_from_quotients(head));
            } else {
                base = BaseMap::rotation(s.num("alpha"));
            }
        } else if (kind == "iet") {
            std::vector<int> perm;
            for (const auto& tok : split_ws(s.at("permutation").value))
                perm.push_back(static_cast<int>(parse_int(tok, s.at("permutation").where)));
            base = BaseMap::iet(parse_doubles(s.at("lengths").value, s.at("lengths").where), perm);
        } else {
            throw ConfigError(s.at("base").where + ": unknown base map '" + kind + "'");
        }
        if (s.has("piece")) {
            std::vector<Roof::Piece> pieces;
            for (const KvEntry* e : s.all("piece")) {
                const auto v = parse_doubles(e->value, e->where);
                if (v.size() != 4) throw ConfigError(e->where + ": piece needs lo hi a b");
                pieces.push_back({v[0], v[1], v[2], v[3]});
            }
            return SpecialFlow(base, Roof(pieces));
        }
        return SpecialFlow(base, Roof::constant(s.num("roof", 1.0)));
    } catch (const DomainError& err) {
        throw ConfigError(s.source + ": [" + s.name + "] " + err.what());
    }
}

}  // namespace skewlab
