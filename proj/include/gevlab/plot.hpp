#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "csv.hpp"

namespace gevlab {

struct PlotSchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> pts;
};

struct PlotSpec {
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
};

inline std::string svg_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[i % 8];
}

inline std::string render_svg(const PlotSpec& p) {
    const double W = 640, H = 420, L = 70, R = 150, T = 40, Bm = 50;
    const double pw = W - L - R, ph = H - T - Bm;
    double x0 = HUGE_VAL, x1 = -HUGE_VAL, y0 = HUGE_VAL, y1 = -HUGE_VAL;
    std::size_t npts = 0;
    for (const auto& s : p.series)
        for (auto [x, y] : s.pts) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x0 = std::min(x0, x), x1 = std::max(x1, x);
            y0 = std::min(y0, y), y1 = std::max(y1, y);
            ++npts;
        }
    const bool empty = npts == 0;
    if (empty) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    auto X = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
    auto Y = [&](double y) { return T + ph - (y - y0) / (y1 - y0) * ph; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    s += "<text x=\"" + svg_num(L) + "\" y=\"24\" font-size=\"14\">" + xml_escape(p.title) + "</text>\n";
    s += "<rect x=\"" + svg_num(L) + "\" y=\"" + svg_num(T) + "\" width=\"" + svg_num(pw) + "\" height=\"" + svg_num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        double fx = x0 + (x1 - x0) * k / 4, fy = y0 + (y1 - y0) * k / 4;
        s += "<text x=\"" + svg_num(X(fx)) + "\" y=\"" + svg_num(T + ph + 16) + "\" text-anchor=\"middle\">" + svg_num(fx) + "</text>\n";
        s += "<text x=\"" + svg_num(L - 6) + "\" y=\"" + svg_num(Y(fy) + 4) + "\" text-anchor=\"end\">" + svg_num(fy) + "</text>\n";
    }
    s += "<text x=\"" + svg_num(L + pw / 2) + "\" y=\"" + svg_num(H - 12) + "\" text-anchor=\"middle\">" + xml_escape(p.xlabel) + "</text>\n";
    s += "<text x=\"16\" y=\"" + svg_num(T + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + svg_num(T + ph / 2) + ")\">" +
         xml_escape(p.ylabel) + "</text>\n";
    if (empty) {
        s += "<text x=\"" + svg_num(L + pw / 2) + "\" y=\"" + svg_num(T + ph / 2) +
             "\" text-anchor=\"middle\" font-size=\"16\" fill=\"#b00\">warning: no data</text>\n";
    }
    for (std::size_t i = 0; i < p.series.size(); ++i) {
        const auto& se = p.series[i];
        std::string pts;
        for (auto [x, y] : se.pts) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            if (!pts.empty()) pts += ' ';
            pts += svg_num(X(x)) + "," + svg_num(Y(y));
        }
        if (pts.empty()) continue;
        s += "<polyline fill=\"none\" stroke=\"" + std::string(palette(i)) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        double ly = T + 14 + 16 * static_cast<double>(i);
        s += "<line x1=\"" + svg_num(L + pw + 10) + "\" y1=\"" + svg_num(ly - 4) + "\" x2=\"" + svg_num(L + pw + 30) + "\" y2=\"" +
             svg_num(ly - 4) + "\" stroke=\"" + palette(i) + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + svg_num(L + pw + 34) + "\" y=\"" + svg_num(ly) + "\">" + xml_escape(se.label) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

inline void require(const Table& t, const std::vector<std::string>& cols, const std::string& kind) {
    for (const auto& c : cols)
        if (std::find(t.columns.begin(), t.columns.end(), c) == t.columns.end())
            throw PlotSchemaError(kind + ": missing column " + c);
}

/// Groups rows by a key column, preserving first-seen order.
inline std::vector<Series> group(const Table& t, const std::string& key, const std::string& prefix,
                                 const std::function<std::pair<double, double>(const std::vector<std::string>&)>& f) {
    std::vector<Series> out;
    std::map<std::string, std::size_t> idx;
    for (const auto& r : t.rows) {
        const std::string k = key.empty() ? "" : r[t.column(key)];
        auto it = idx.find(k);
        if (it == idx.end()) {
            it = idx.emplace(k, out.size()).first;
            out.push_back({key.empty() ? prefix : prefix + k, {}});
        }
        out[it->second].pts.push_back(f(r));
    }
    return out;
}

inline double log10_or_nan(double v) { return v > 0 ? std::log10(v) : std::nan(""); }

}  // namespace detail

inline const std::vector<std::string>& plot_kinds() {
    static const std::vector<std::string> k{"le_vs_E", "ldt_curve", "decay_profile", "loja_loglog", "continuity"};
    return k;
}

/// Builds the figure from the CSV text alone.
inline std::string plot_svg(const Table& t, const std::string& kind) {
    using detail::log10_or_nan;
    detail::PlotSpec p;
    const bool blank = t.columns.empty();
    auto need = [&](const std::vector<std::string>& cols) {
        if (!blank) detail::require(t, cols, kind);
    };
    auto num = [&](const std::vector<std::string>& r, const char* c) { return parse_num(r[t.column(c)]); };
    if (kind == "le_vs_E") {
        need({"E", "N", "mean_le"});
        p = {"finite-scale Lyapunov exponent", "E", "mean L_N", {}};
        if (!blank) p.series = detail::group(t, "N", "N=", [&](const auto& r) { return std::pair{num(r, "E"), num(r, "mean_le")}; });
    } else if (kind == "ldt_curve") {
        need({"n", "fraction"});
        p = {"deviation fraction", "log10 N", "log10 fraction", {}};
        if (!blank)
            p.series = detail::group(t, "", "fraction", [&](const auto& r) {
                return std::pair{std::log10(num(r, "n")), log10_or_nan(num(r, "fraction"))};
            });
    } else if (kind == "decay_profile") {
        need({"site", "abs_psi"});
        p = {"eigenvector profile", "site", "log10 |psi|", {}};
        if (!blank)
            p.series = detail::group(t, "", "|psi|", [&](const auto& r) {
                return std::pair{num(r, "site"), log10_or_nan(num(r, "abs_psi"))};
            });
    } else if (kind == "loja_loglog") {
        need({"E", "eps", "measure_bound", "mc_estimate"});
        p = {"sublevel measure", "log10 eps", "log10 measure", {}};
        if (!blank) {
            p.series = detail::group(t, "E", "bound E=", [&](const auto& r) {
                return std::pair{std::log10(num(r, "eps")), log10_or_nan(num(r, "measure_bound"))};
            });
            auto mc = detail::group(t, "E", "MC E=", [&](const auto& r) {
                return std::pair{std::log10(num(r, "eps")), log10_or_nan(num(r, "mc_estimate"))};
            });
            p.series.insert(p.series.end(), mc.begin(), mc.end());
        }
    } else if (kind == "continuity") {
        need({"dE", "lhs"});
        p = {"modulus of continuity", "log10 |E-E'|", "log10 |L_N(E)-L_N(E')|", {}};
        if (!blank)
            p.series = detail::group(t, "N", "N=", [&](const auto& r) {
                return std::pair{log10_or_nan(num(r, "dE")), log10_or_nan(num(r, "lhs"))};
            });
    } else {
        throw PlotSchemaError("unknown plot kind: " + kind);
    }
    return detail::render_svg(p);
}

inline void emit_plot(const std::filesystem::path& csv, const std::string& kind, const std::filesystem::path& svg) {
    Table t;
    if (std::filesystem::exists(csv) && std::filesystem::file_size(csv) > 0) t = read_table(csv);
    else if (!std::filesystem::exists(csv)) throw std::runtime_error("cannot read " + csv.string());
    std::string text = plot_svg(t, kind);
    if (svg.has_parent_path()) std::filesystem::create_directories(svg.parent_path());
    std::ofstream out(svg, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + svg.string());
    out << text;
}

}  // namespace gevlab
