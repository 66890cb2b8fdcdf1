#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fourier_series.hpp"

namespace gevlab {

struct MultiIndex {
    int a1 = 0;
    int a2 = 0;

    int order() const { return a1 + a2; }
    bool operator<=(const MultiIndex& o) const { return a1 <= o.a1 && a2 <= o.a2; }
    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
};

/// All alpha <= m with alpha != 0.
inline std::vector<MultiIndex> indices_below(MultiIndex m) {
    std::vector<MultiIndex> out;
    for (int a = 0; a <= m.a1; ++a)
        for (int b = 0; b <= m.a2; ++b)
            if (a + b > 0) out.push_back({a, b});
    return out;
}

struct TransversalityLevel {
    double c = 0.0;
    Torus2Point argmin;
    double lipschitz_slack = 0.0;
    double scale = 1.0;  // largest derivative majorant involved
};

/// Grid minimum over the n x n lattice {i/n} of max_{0 != alpha <= m} |d^alpha v|.
/// The slack bounds how far the true minimum can sit below the grid one.
inline TransversalityLevel transversality_level(const FourierSeries2& v, MultiIndex m, int grid_n) {
    if (grid_n < 2) throw std::invalid_argument("transversality: grid_n must be >= 2");
    auto alphas = indices_below(m);
    if (alphas.empty()) throw std::invalid_argument("transversality: m must be nonzero");
    const std::size_t n2 = static_cast<std::size_t>(grid_n) * grid_n;
    std::vector<double> best(n2, 0.0);
    TransversalityLevel out;
    const double h = 1.0 / grid_n;
    for (const auto& a : alphas) {
        auto vals = v.derivative(a.a1, a.a2).eval_grid(grid_n);
        for (std::size_t k = 0; k < n2; ++k) best[k] = std::max(best[k], std::fabs(vals[k]));
        double lip = v.derivative_majorant(a.a1 + 1, a.a2) + v.derivative_majorant(a.a1, a.a2 + 1);
        out.lipschitz_slack = std::max(out.lipschitz_slack, 0.5 * h * lip);
        out.scale = std::max(out.scale, v.derivative_majorant(a.a1, a.a2));
    }
    auto it = std::min_element(best.begin(), best.end());
    std::size_t k = static_cast<std::size_t>(it - best.begin());
    out.c = *it;
    out.argmin = Torus2Point(static_cast<double>(k / grid_n) * h, static_cast<double>(k % grid_n) * h);
    return out;
}

struct TransversalityReport {
    MultiIndex m;
    double c = 0.0;
    Torus2Point argmin;
    int grid_n = 0;
    double spacing = 0.0;
    double lipschitz_slack = 0.0;
    bool certified = false;  // c exceeds the slack
};

/// Smallest m <= m_max (ordered by |m|, then lexicographically) whose grid
/// level is nonzero. Throws when every level vanishes to machine precision.
inline TransversalityReport transversality_certificate(const FourierSeries2& v, MultiIndex m_max, int grid_n) {
    auto cands = indices_below(m_max);
    std::stable_sort(cands.begin(), cands.end(), [](const MultiIndex& x, const MultiIndex& y) {
        if (x.order() != y.order()) return x.order() < y.order();
        return x.a1 != y.a1 ? x.a1 < y.a1 : x.a2 < y.a2;
    });
    for (const auto& m : cands) {
        auto lv = transversality_level(v, m, grid_n);
        if (lv.c > 1e-12 * lv.scale) {
            TransversalityReport r;
            r.m = m;
            r.c = lv.c;
            r.argmin = lv.argmin;
            r.grid_n = grid_n;
            r.spacing = 1.0 / grid_n;
            r.lipschitz_slack = lv.lipschitz_slack;
            r.certified = lv.c > lv.lipschitz_slack;
            return r;
        }
    }
    throw std::runtime_error("transversality certificate failed: all derivatives up to m_max vanish on the grid");
}

}  // namespace gevlab
