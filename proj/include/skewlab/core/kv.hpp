#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "skewlab/core/error.hpp"

namespace skewlab {

// Flat "key = value" text grouped by [section] headers. '#' starts a comment.
// Keys may repeat; order is kept.
struct KvEntry {
    std::string key;
    std::string value;
    std::string where;  // "file:line" for messages
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

inline double parse_double(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    double v = 0.0;
    const char* end = t.data() + t.size();
    auto [p, ec] = std::from_chars(t.data(), end, v);
    if (ec != std::errc() || p != end || t.empty()) throw ConfigError(where + ": not a number: '" + t + "'");
    return v;
}

inline long long parse_int(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    long long v = 0;
    const char* end = t.data() + t.size();
    auto [p, ec] = std::from_chars(t.data(), end, v);
    if (ec != std::errc() || p != end || t.empty()) throw ConfigError(where + ": not an integer: '" + t + "'");
    return v;
}

inline std::vector<double> parse_doubles(const std::string& text, const std::string& where) {
    std::vector<double> out;
    for (const auto& tok : split_ws(text)) out.push_back(parse_double(tok, where));
    return out;
}

inline bool parse_bool(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    throw ConfigError(where + ": expected true/false, got '" + t + "'");
}

class KvSection {
public:
    std::string name;
    std::string source;
    std::vector<KvEntry> entries;

    bool has(const std::string& key) const {
        for (const auto& e : entries)
            if (e.key == key) return true;
        return false;
    }
    const KvEntry* find(const std::string& key) const {
        const KvEntry* hit = nullptr;
        for (const auto& e : entries)
            if (e.key == key) hit = &e;  // last one wins
        return hit;
    }
    std::vector<const KvEntry*> all(const std::string& key) const {
        std::vector<const KvEntry*> out;
        for (const auto& e : entries)
            if (e.key == key) out.push_back(&e);
        return out;
    }
    const KvEntry& at(const std::string& key) const {
        if (auto* e = find(key)) return *e;
        throw ConfigError(source + ": [" + name + "] missing key '" + key + "'");
    }
    std::string str(const std::string& key, const std::string& fallback) const {
        auto* e = find(key);
        return e ? e->value : fallback;
    }
    double num(const std::string& key) const { return parse_double(at(key).value, at(key).where); }
    double num(const std::string& key, double fallback) const {
        auto* e = find(key);
        return e ? parse_double(e->value, e->where) : fallback;
    }
    long long integer(const std::string& key) const { return parse_int(at(key).value, at(key).where); }
    long long integer(const std::string& key, long long fallback) const {
        auto* e = find(key);
        return e ? parse_int(e->value, e->where) : fallback;
    }
    bool flag(const std::string& key, bool fallback) const {
        auto* e = find(key);
        return e ? parse_bool(e->value, e->where) : fallback;
    }
};

class KvDocument {
public:
    std::vector<KvSection> sections;
    std::string source;

    static KvDocument parse(const std::string& text, const std::string& source) {
        KvDocument doc;
        doc.source = source;
        doc.sections.push_back(KvSection{"", source, {}});
        std::istringstream in(text);
        std::string line;
        for (int no = 1; std::getline(in, line); ++no) {
            const std::string where = source + ":" + std::to_string(no);
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError(where + ": malformed section header");
                doc.sections.push_back(KvSection{trim(line.substr(1, line.size() - 2)), source, {}});
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            if (key.empty()) throw ConfigError(where + ": empty key");
            doc.sections.back().entries.push_back({key, trim(line.substr(eq + 1)), where});
        }
        return doc;
    }

    static KvDocument load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse(buf.str(), path);
    }

    const KvSection* find(const std::string& name) const {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
    const KvSection& at(const std::string& name) const {
        if (auto* s = find(name)) return *s;
        throw ConfigError(source + ": missing section [" + name + "]");
    }
};

}  // namespace skewlab
