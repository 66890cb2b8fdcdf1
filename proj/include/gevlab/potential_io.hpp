#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fourier_series.hpp"
#include "gevrey.hpp"

namespace gevlab {

/// Reads lines "l1 l2 re im"; '#' starts a comment. Missing Hermitian
/// partners are filled in with the conjugate.
inline FourierSeries2 read_series(std::istream& in) {
    std::map<std::pair<int, int>, cplx> coef;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        int l1, l2;
        double re, im;
        if (!(ls >> l1)) continue;
        if (!(ls >> l2 >> re >> im)) throw std::invalid_argument("series line " + std::to_string(lineno) + ": expected 'l1 l2 re im'");
        coef[{l1, l2}] += cplx(re, im);
    }
    std::vector<Term> terms;
    for (const auto& [l, c] : coef) {
        terms.push_back({l.first, l.second, c});
        if (!coef.count({-l.first, -l.second})) terms.push_back({-l.first, -l.second, std::conj(c)});
    }
    return FourierSeries2(std::move(terms));
}

inline FourierSeries2 read_series_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open series file: " + path.string());
    return read_series(in);
}

inline void write_series(std::ostream& out, const FourierSeries2& v) {
    out.precision(17);
    for (const auto& t : v.terms()) out << t.l1 << ' ' << t.l2 << ' ' << t.c.real() << ' ' << t.c.imag() << '\n';
}

inline FourierSeries2 cosine_potential() { return FourierSeries2({{1, 0, 0.5}, {-1, 0, 0.5}}); }

inline FourierSeries2 cos_sum_potential() {
    return FourierSeries2({{1, 0, 0.5}, {-1, 0, 0.5}, {0, 1, 0.5}, {0, -1, 0.5}});
}

inline FourierSeries2 constant_potential(double c) { return FourierSeries2({{0, 0, c}}); }

namespace detail {
inline std::map<std::string, std::string> parse_kv(const std::string& s) {
    std::map<std::string, std::string> kv;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("expected key=value in '" + s + "'");
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return kv;
}
}  // namespace detail

/// Presets: cosine, cos-sum, constant:<c>,
/// gevrey:s=<s>,rho=<rho>[,M=<M>][,deg=<d>][,seed=<n>], file:<path>.
/// A bare existing path is read as a series file.
inline FourierSeries2 parse_potential(const std::string& spec) {
    if (spec == "cosine" || spec == "cos") return cosine_potential();
    if (spec == "cos-sum") return cos_sum_potential();
    if (spec.rfind("constant:", 0) == 0) return constant_potential(std::stod(spec.substr(9)));
    if (spec.rfind("file:", 0) == 0) return read_series_file(spec.substr(5));
    if (spec.rfind("gevrey:", 0) == 0) {
        auto kv = detail::parse_kv(spec.substr(7));
        GevreyParams p;
        int degree = 24;
        std::optional<std::uint64_t> seed;
        for (const auto& [k, val] : kv) {
            if (k == "s") p.s = std::stod(val);
            else if (k == "rho") p.rho = std::stod(val);
            else if (k == "M") p.M = std::stod(val);
            else if (k == "deg") degree = std::stoi(val);
            else if (k == "seed") seed = std::stoull(val);
            else throw std::invalid_argument("unknown gevrey key: " + k);
        }
        if (lattice_ball_size(degree) > 10000) throw std::invalid_argument("gevrey: degree exceeds the 10^4 coefficient cap");
        return gevrey_series(p, degree, seed);
    }
    if (std::filesystem::exists(spec)) return read_series_file(spec);
    throw std::invalid_argument("unknown potential: " + spec);
}

}  // namespace gevlab
