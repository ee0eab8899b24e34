#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace skewlab {

inline std::string fmt(double v, int digits = 10) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream out;
    out.precision(digits);
    out << v;
    return out.str();
}

// Rows of already formatted cells; quoting only where a cell needs it.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    void write_csv(std::ostream& out) const {
        auto cell = [](const std::string& s) {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            return q + "\"";
        };
        auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << cell(r[i]);
            out << '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
    }
};

struct Series {
    std::string name;
    std::vector<double> x, y;
    bool points = false;  // scatter instead of a polyline
};

struct Plot {
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
    bool log_x = false, log_y = false;
};

// Minimal SVG line/scatter plot: axes, min/max tick labels, one colour per series.
inline void write_svg(std::ostream& out, const Plot& p) {
    const double w = 640, h = 420, left = 70, right = 20, top = 40, bottom = 50;
    auto tx = [&](double v) { return p.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return p.log_y ? std::log10(v) : v; };
    double x0 = HUGE_VAL, x1 = -HUGE_VAL, y0 = HUGE_VAL, y1 = -HUGE_VAL;
    for (const auto& s : p.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * (w - left - right); };
    auto py = [&](double v) { return h - bottom - (ty(v) - y0) / (y1 - y0) * (h - top - bottom); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    auto label = [](double v, bool log) { return fmt(log ? std::pow(10.0, v) : v, 4); };
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << p.title << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << left << "\" y=\"" << h - bottom + 16 << "\" font-size=\"11\">" << label(x0, p.log_x) << "</text>\n";
    out << "<text x=\"" << w - right << "\" y=\"" << h - bottom + 16 << "\" font-size=\"11\" text-anchor=\"end\">"
        << label(x1, p.log_x) << "</text>\n";
    out << "<text x=\"" << left - 4 << "\" y=\"" << h - bottom << "\" font-size=\"11\" text-anchor=\"end\">"
        << label(y0, p.log_y) << "</text>\n";
    out << "<text x=\"" << left - 4 << "\" y=\"" << top + 8 << "\" font-size=\"11\" text-anchor=\"end\">"
        << label(y1, p.log_y) << "</text>\n";
    out << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << p.xlabel << "</text>\n";
    out << "<text x=\"16\" y=\"" << (top + h - bottom) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
        << (top + h - bottom) / 2 << ")\" text-anchor=\"middle\">" << p.ylabel << "</text>\n";
    for (std::size_t k = 0; k < p.series.size(); ++k) {
        const Series& s = p.series[k];
        const char* c = colours[k % 6];
        if (s.points) {
            for (std::size_t i = 0; i < s.x.size(); ++i)
                out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\"" << c
                    << "\"/>\n";
        } else {
            out << "<polyline fill=\"none\" stroke=\"" << c << "\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) out << (i ? " " : "") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
            out << "\"/>\n";
        }
        out << "<text x=\"" << w - right - 4 << "\" y=\"" << top + 14 * (k + 1) << "\" font-size=\"11\" text-anchor=\"end\" fill=\""
            << c << "\">" << s.name << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace skewlab
