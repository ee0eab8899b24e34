#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "skewlab/cocycle/io.hpp"
#include "skewlab/fiber/io.hpp"
#include "skewlab/fiber/partition.hpp"
#include "skewlab/skew/skew.hpp"
#include "skewlab/sft/io.hpp"

namespace skewlab {

// Keys accepted per section; anything else is a config error.
inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema{
        {"", {}},
        {"run", {"seed", "threads", "out"}},
        {"system", {"file", "alphabet", "row", "potential_window", "potential"}},
        {"cocycle", {"file", "window", "value", "default", "center"}},
        {"fiber", {"file", "base", "alpha", "quotients", "lengths", "permutation", "roof", "piece"}},
        {"partition", {"file", "height", "width", "cuts", "eta", "samples", "pairs", "horizon", "t0", "slope_low",
                       "slope_high"}},
        {"gibbs", {"cylinder_length", "tolerance"}},
        {"clt", {"n", "samples", "ks_bound", "past"}},
        {"mllt", {"n", "samples", "k", "interval", "pair", "spread_bound"}},
        {"qe", {"level", "repeats", "overlap_tolerance", "margin", "pairs", "epsilon"}},
        {"vwb", {"n", "atoms", "samples", "epsilon", "depth", "align_horizon", "align_tol", "theta_tol",
                 "steer_limit"}},
        {"match", {"epsilon", "a", "c", "xi", "n1", "hat_ratio", "ratio_bound", "agreement", "level", "samples",
                   "verify"}},
        {"dbar", {"p", "q", "n", "names", "tolerance"}},
    };
    return schema;
}

// "0 1 : 2" -> ({0, 1}, {2})
inline std::pair<Word, Word> parse_word_pair(const KvEntry& e) {
    const auto colon = e.value.find(':');
    if (colon == std::string::npos) throw ConfigError(e.where + ": expected 'symbols : symbols'");
    auto word = [&](const std::string& text) {
        Word w;
        for (const auto& tok : split_ws(text)) {
            const long long s = parse_int(tok, e.where);
            if (s < 0 || s > 65535) throw ConfigError(e.where + ": symbol out of range");
            w.push_back(static_cast<Symbol>(s));
        }
        return w;
    };
    return {word(e.value.substr(0, colon)), word(e.value.substr(colon + 1))};
}

inline std::vector<double> numbers(const KvSection& s, const std::string& key, std::vector<double> fallback) {
    auto* e = s.find(key);
    if (!e) return fallback;
    auto v = parse_doubles(e->value, e->where);
    if (v.empty()) throw ConfigError(e->where + ": expected at least one number");
    return v;
}

inline std::size_t positive(const KvSection& s, const std::string& key, long long fallback) {
    const long long v = s.integer(key, fallback);
    if (v < 1) throw ConfigError((s.has(key) ? s.at(key).where : s.source) + ": '" + key + "' must be positive");
    return static_cast<std::size_t>(v);
}

// A parsed experiment file. Sections [system], [cocycle], [fiber] and
// [partition] may hold "file = other.conf" to take that section from another
// file, resolved relative to the referring file.
class ExperimentConfig {
public:
    std::string path;
    KvDocument doc;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out = "out";

    static ExperimentConfig parse(const std::string& text, const std::string& source) {
        ExperimentConfig c;
        c.path = source;
        c.doc = KvDocument::parse(text, source);
        for (auto& s : c.doc.sections) resolve(s, std::filesystem::path(source).parent_path(), 0);
        c.validate();
        const KvSection run = c.section("run");
        const long long seed = run.integer("seed", 1);
        if (seed < 0) throw ConfigError(run.at("seed").where + ": seed must be non-negative");
        c.seed = static_cast<std::uint64_t>(seed);
        c.threads = static_cast<unsigned>(positive(run, "threads", 1));
        c.out = run.str("out", "out");
        return c;
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str(), path);
    }

    // An absent section reads as empty, so every key takes its default.
    KvSection section(const std::string& name) const {
        if (auto* s = doc.find(name)) return *s;
        return KvSection{name, path, {}};
    }

    MarkovGibbs gibbs() const { return read_gibbs(doc.at("system")); }

    Cocycle cocycle(const MarkovGibbs& mg) const {
        const KvSection& s = doc.at("cocycle");
        Cocycle c = read_cocycle(s, mg.matrix());
        return s.flag("center", false) ? center(c, mg) : c;
    }

    SpecialFlow flow() const { return read_flow(doc.at("fiber")); }

    FiberPartition partition(const SpecialFlow& f) const {
        const KvSection s = section("partition");
        const double height = s.num("height", 0.5 * f.roof().min_value());
        try {
            if (auto* e = s.find("cuts")) {
                auto cuts = parse_doubles(e->value, e->where);
                if (cuts.empty() || cuts.front() != 0.0 || !std::is_sorted(cuts.begin(), cuts.end()) ||
                    cuts.back() >= 1.0)
                    throw ConfigError(e->where + ": cuts must start at 0, increase, and stay below 1");
                require(height > 0.0 && height <= f.roof().min_value(), "partition height must lie in (0, min roof]");
                return FiberPartition(f, cuts, height);
            }
            return build_generating_partition(f, height, s.num("width", 0.0));
        } catch (const DomainError& err) {
            throw ConfigError(s.source + ": [partition] " + err.what());
        }
    }

    SkewSystem system() const {
        MarkovGibbs mg = gibbs();
        Cocycle c = cocycle(mg);
        SpecialFlow f = flow();
        FiberPartition q = partition(f);
        return SkewSystem(std::move(mg), std::move(c), std::move(f), std::move(q));
    }

private:
    static void resolve(KvSection& s, const std::filesystem::path& dir, int depth) {
        const KvEntry* e = s.find("file");
        if (!e) return;
        if (depth > 8) throw ConfigError(e->where + ": file references nest too deeply");
        if (s.entries.size() > 1) throw ConfigError(e->where + ": a section with 'file' takes no other keys");
        const std::filesystem::path target = dir / e->value;
        const KvDocument other = KvDocument::load(target.string());
        const KvSection* hit = other.find(s.name);
        if (!hit) throw ConfigError(e->where + ": " + target.string() + " has no [" + s.name + "] section");
        KvSection copy = *hit;
        resolve(copy, target.parent_path(), depth + 1);
        s.entries = std::move(copy.entries);
        s.source = copy.source;
    }

    void validate() const {
        const auto& schema = config_schema();
        for (const auto& s : doc.sections) {
            auto it = schema.find(s.name);
            if (it == schema.end()) {
                const std::string where = s.entries.empty() ? s.source : s.entries.front().where;
                throw ConfigError(where + ": unknown section [" + s.name + "]");
            }
            for (const auto& e : s.entries)
                if (!it->second.count(e.key)) throw ConfigError(e.where + ": unknown key '" + e.key + "' in [" + s.name + "]");
        }
    }
};

}  // namespace skewlab
