#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "executor.hpp"
#include "fourier_series.hpp"
#include "sampling.hpp"
#include "transversality.hpp"

namespace gevlab {

struct Rect {
    double a1 = 0.0, b1 = 1.0;  // x1 range
    double a2 = 0.0, b2 = 1.0;  // x2 range

    double w1() const { return b1 - a1; }
    double w2() const { return b2 - a2; }
    double area() const { return w1() * w2(); }
    bool valid() const { return b1 > a1 && b2 > a2; }
    bool contains(double x1, double x2, double tol = 1e-12) const {
        return x1 >= a1 - tol && x1 <= b1 + tol && x2 >= a2 - tol && x2 <= b2 + tol;
    }
};

enum class Axis { x1, x2 };

/// A function on the square together with sup bounds for its two partials.
struct Field {
    std::function<double(double, double)> value;
    double d1_bound = 0.0;
    double d2_bound = 0.0;

    double operator()(double x1, double x2) const { return value(x1, x2); }
};

/// d^alpha v - shift, with majorant bounds on its gradient.
inline Field series_field(const FourierSeries2& v, MultiIndex alpha, double shift = 0.0) {
    auto d = v.derivative(alpha.a1, alpha.a2);
    Field f;
    f.d1_bound = v.derivative_majorant(alpha.a1 + 1, alpha.a2);
    f.d2_bound = v.derivative_majorant(alpha.a1, alpha.a2 + 1);
    f.value = [d = std::move(d), shift](double x1, double x2) { return d.eval(Torus2Point(x1, x2)) - shift; };
    return f;
}

/// min |f| over a (g+1)^2 grid on R minus the Lipschitz slack; a lower bound
/// for min_R |f| up to rounding.
inline double certified_lower_bound(const Field& f, const Rect& R, int g = 6) {
    double h1 = R.w1() / g, h2 = R.w2() / g;
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= g; ++i)
        for (int j = 0; j <= g; ++j) m = std::min(m, std::fabs(f(R.a1 + i * h1, R.a2 + j * h2)));
    return m - 0.5 * (h1 * f.d1_bound + h2 * f.d2_bound);
}

struct CertificationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// R seen in (u, w) coordinates with w the monotone direction.
struct AxisView {
    const Field& f;
    Rect R;
    Axis axis;

    double u0() const { return axis == Axis::x2 ? R.a1 : R.a2; }
    double u1() const { return axis == Axis::x2 ? R.b1 : R.b2; }
    double w0() const { return axis == Axis::x2 ? R.a2 : R.a1; }
    double w1() const { return axis == Axis::x2 ? R.b2 : R.b1; }
    double eval(double u, double w) const { return axis == Axis::x2 ? f(u, w) : f(w, u); }
    Rect rect(double ua, double ub, double wa, double wb) const {
        return axis == Axis::x2 ? Rect{ua, ub, wa, wb} : Rect{wa, wb, ua, ub};
    }
};

// Zero of w -> sgn*f(u, w) (increasing) clamped to [w0, w1].
inline double clamped_root(const AxisView& V, double u, double sgn, double tol) {
    double lo = V.w0(), hi = V.w1();
    if (sgn * V.eval(u, lo) >= 0.0) return lo;
    if (sgn * V.eval(u, hi) <= 0.0) return hi;
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        if (sgn * V.eval(u, mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double monotone_sign(const AxisView& V) {
    double um = 0.5 * (V.u0() + V.u1());
    return V.eval(um, V.w1()) >= V.eval(um, V.w0()) ? 1.0 : -1.0;
}

}  // namespace detail

struct ImplicitBranch {
    double lo = 0.0, hi = 0.0;  // I0
    std::vector<std::pair<double, double>> samples;
    double slope_bound = 0.0;
    double max_residual = 0.0;
    double max_slope = 0.0;
};

/// Solves f(x1, phi(x1)) = 0 near a root (a1, a2), assuming |d_x2 f| >= eps0 on R
/// and |d_x1 f| <= A. The branch lives on (a1 - k, a1 + k) cut to R with
/// k = c_impl * eps0 / A * min(a2 - c, d - a2).
inline ImplicitBranch implicit_branch_solve(const Field& f, const Rect& R, double eps0, double A, double a1, double a2,
                                            double root_tol = 1e-12, double c_impl = 0.5, int samples = 65) {
    if (!(eps0 > 0.0) || !(A > 0.0)) throw std::invalid_argument("implicit_branch_solve: eps0 and A must be positive");
    if (!R.contains(a1, a2, 0.0)) throw std::invalid_argument("implicit_branch_solve: root outside rectangle");
    if (std::fabs(f(a1, a2)) > root_tol) throw CertificationFailed("certification-failed: f(root) exceeds root_tol");
    double k = c_impl * eps0 / A * std::min(a2 - R.a2, R.b2 - a2);
    ImplicitBranch br;
    br.lo = std::max(R.a1, a1 - k);
    br.hi = std::min(R.b1, a1 + k);
    br.slope_bound = A / eps0;
    detail::AxisView V{f, R, Axis::x2};
    double sgn = detail::monotone_sign(V);
    samples = std::max(samples, 2);
    for (int s = 0; s < samples; ++s) {
        double x = br.hi == br.lo ? br.lo : br.lo + (br.hi - br.lo) * s / (samples - 1);
        double flo = sgn * f(x, R.a2), fhi = sgn * f(x, R.b2);
        if (!(flo < 0.0 && fhi > 0.0)) throw CertificationFailed("certification-failed: slice does not bracket a sign change");
        double y = detail::clamped_root(V, x, sgn, 1e-16);
        double r = std::fabs(f(x, y));
        // bisection stops at adjacent doubles; a steep slice may leave r above tol
        if (r > root_tol) throw CertificationFailed("certification-failed: residual above root_tol");
        br.max_residual = std::max(br.max_residual, r);
        if (!br.samples.empty()) {
            double dx = x - br.samples.back().first;
            if (dx > 0) br.max_slope = std::max(br.max_slope, std::fabs(y - br.samples.back().second) / dx);
        }
        br.samples.emplace_back(x, y);
        if (br.hi == br.lo) break;
    }
    if (br.max_slope > br.slope_bound * (1 + 1e-6))
        throw CertificationFailed("certification-failed: sampled slope exceeds A/eps0");
    return br;
}

struct StripMiddle {
    double lo = 0.0, hi = 0.0;  // I_j along the non-monotone axis
    std::optional<Rect> strip;  // empty when the column is clean
};

struct StripCover {
    Rect top, bottom;
    std::vector<StripMiddle> middles;
    Axis axis = Axis::x2;
    double column_width = 0.0;
    double half_height = 0.0;  // eps1 / eps0
};

/// Covers {|f| < eps1} in R by two edge strips of height 2 eps1/eps0 and one
/// bounding rectangle per column of width ~eps1/A. Roots are bisected at both
/// ends and the middle of each column; between samples the root curve moves
/// by at most A/eps0 per unit length.
inline StripCover strip_cover(const Field& f, const Rect& R, double eps1, double eps0, double A, Axis axis = Axis::x2) {
    if (!R.valid()) throw std::invalid_argument("strip_cover: empty rectangle");
    if (!(eps0 > 0.0) || !(eps1 > 0.0)) throw std::invalid_argument("strip_cover: eps0 and eps1 must be positive");
    detail::AxisView V{f, R, axis};
    const double I = V.u1() - V.u0();
    if (!(eps1 < eps0 * I / 4)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "strip_cover: eps1 < eps0*|I|/4 fails (eps1=%.3g, eps0*|I|/4=%.3g)", eps1, eps0 * I / 4);
        throw std::invalid_argument(buf);
    }
    StripCover sc;
    sc.axis = axis;
    const double c = V.w0(), d = V.w1();
    const double hs = 2 * eps1 / eps0;
    const double top_lo = std::max(c, d - hs);
    const double bot_hi = std::min(c + hs, top_lo);
    sc.top = V.rect(V.u0(), V.u1(), top_lo, d);
    sc.bottom = V.rect(V.u0(), V.u1(), c, bot_hi);
    sc.half_height = eps1 / eps0;
    double cols_f = A > 0.0 ? std::ceil(I * A / eps1) : 1.0;
    if (cols_f > 1e7) throw std::invalid_argument("strip_cover: too many columns");
    const std::size_t cols = std::max<std::size_t>(1, static_cast<std::size_t>(cols_f));
    const double w = I / static_cast<double>(cols);
    sc.column_width = w;
    if (bot_hi >= top_lo) {
        for (std::size_t j = 0; j < cols; ++j) sc.middles.push_back({V.u0() + j * w, j + 1 == cols ? V.u1() : V.u0() + (j + 1) * w, {}});
        return sc;
    }
    const double sgn = detail::monotone_sign(V);
    const double tol = 1e-15 + 1e-13 * (d - c);
    const double L = A / eps0;
    std::vector<double> psi(2 * cols + 1);
    for (std::size_t k = 0; k <= 2 * cols; ++k) {
        double u = k == 2 * cols ? V.u1() : V.u0() + 0.5 * w * static_cast<double>(k);
        psi[k] = detail::clamped_root(V, u, sgn, tol);
    }
    const double pad = eps1 / eps0 + 2 * tol;
    for (std::size_t j = 0; j < cols; ++j) {
        StripMiddle m{V.u0() + j * w, j + 1 == cols ? V.u1() : V.u0() + (j + 1) * w, {}};
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t s = 2 * j; s < 2 * j + 2; ++s) {
            double centre = 0.5 * (psi[s] + psi[s + 1]), spread = 0.5 * L * (0.5 * w);
            // |psi(a)-psi(b)| <= L*delta, so psi stays within the two cones from the ends
            lo = std::min(lo, centre - spread);
            hi = std::max(hi, centre + spread);
        }
        double s_lo = std::max(lo - pad, bot_hi), s_hi = std::min(hi + pad, top_lo);
        if (s_hi > s_lo) m.strip = V.rect(m.lo, m.hi, s_lo, s_hi);
        sc.middles.push_back(m);
    }
    return sc;
}

struct RefineResult {
    std::vector<Rect> bad_rects;
    std::vector<Rect> good;
    double bad_measure = 0.0;
    double cov_ratio = 0.0;  // bad_measure / (kappa0 eps1 / eps0)
    bool cov_ok = true;
    std::size_t validation_failures = 0;
};

/// One refinement step: strip cover of {|f| < eps1} plus the complementary
/// cells, each checked on a 3x3 grid for |f| >= eps1. With chop the cells are
/// cut into squares of side ~eps1/A; otherwise column rectangles are kept.
inline RefineResult refine_step(const Field& f, const Rect& R, double eps1, double eps0, double A, Axis axis = Axis::x2,
                                bool chop = true, double C_cov = 8.0) {
    auto sc = strip_cover(f, R, eps1, eps0, A, axis);
    detail::AxisView V{f, R, axis};
    RefineResult out;
    auto add_bad = [&](const Rect& r) {
        if (r.valid()) {
            out.bad_rects.push_back(r);
            out.bad_measure += r.area();
        }
    };
    add_bad(sc.bottom);
    add_bad(sc.top);
    const double mid_lo = axis == Axis::x2 ? sc.bottom.b2 : sc.bottom.b1;
    const double mid_hi = axis == Axis::x2 ? sc.top.a2 : sc.top.a1;
    const double side = A > 0.0 ? eps1 / A : std::numeric_limits<double>::infinity();
    auto add_good = [&](double ua, double ub, double wa, double wb) {
        if (!(wb > wa)) return;
        std::size_t pieces = 1;
        if (chop && std::isfinite(side)) pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround((wb - wa) / side)));
        double h = (wb - wa) / static_cast<double>(pieces);
        for (std::size_t p = 0; p < pieces; ++p) {
            double lo = wa + h * static_cast<double>(p), hi = p + 1 == pieces ? wb : wa + h * static_cast<double>(p + 1);
            bool ok = true;
            for (int i = 0; i <= 2 && ok; ++i)
                for (int j = 0; j <= 2 && ok; ++j)
                    ok = std::fabs(V.eval(ua + 0.5 * i * (ub - ua), lo + 0.5 * j * (hi - lo))) >= eps1 * (1 - 1e-9);
            Rect r = V.rect(ua, ub, lo, hi);
            if (ok) {
                out.good.push_back(r);
            } else {
                ++out.validation_failures;
                add_bad(r);
            }
        }
    };
    for (const auto& m : sc.middles) {
        if (mid_hi <= mid_lo) break;
        if (!m.strip) {
            add_good(m.lo, m.hi, mid_lo, mid_hi);
            continue;
        }
        add_bad(*m.strip);
        double s_lo = axis == Axis::x2 ? m.strip->a2 : m.strip->a1;
        double s_hi = axis == Axis::x2 ? m.strip->b2 : m.strip->b1;
        add_good(m.lo, m.hi, mid_lo, s_lo);
        add_good(m.lo, m.hi, s_hi, mid_hi);
    }
    double kappa0 = V.u1() - V.u0();
    out.cov_ratio = out.bad_measure / (kappa0 * eps1 / eps0);
    out.cov_ok = out.cov_ratio <= C_cov;
    return out;
}

struct LojaOptions {
    double c_impl = 0.5;
    double C_cov = 8.0;
    double min_side = 1.0 / 8192;
    int cert_grid = 6;
    int start_grid = 0;  // 0: ceil(2A/c) capped at max_start
    int max_start = 256;
    bool strict = false;  // throw instead of absorbing ladder-infeasible squares
    unsigned threads = 1;
    Rect region{};
};

struct GoodCell {
    Rect rect;
    double bound = 0.0;
};

struct SublevelCover {
    std::vector<Rect> bad_rects;
    std::vector<GoodCell> good;
    double measure_bound = 0.0;
    double exponent_b = 0.0;
    double eps = 0.0;
    double E = 0.0;
    MultiIndex m;
    int start_grid = 0;
    std::size_t direct_good = 0;   // squares certified without refinement
    std::size_t refined = 0;       // squares handled by a derivative ladder
    std::size_t splits = 0;
    std::size_t absorbed_infeasible = 0;
    std::size_t absorbed_uncertified = 0;
    double absorbed_area = 0.0;
    std::size_t validation_failures = 0;
    std::size_t cov_violations = 0;
    double cov_ratio_max = 0.0;
    std::vector<std::size_t> order_hist;  // refined squares by |alpha|
};

/// sup of |grad d^alpha v| over alpha <= m, the A of the measure bound.
inline double loja_gradient_bound(const FourierSeries2& v, MultiIndex m) {
    double A = std::max(v.derivative_majorant(1, 0), v.derivative_majorant(0, 1));
    for (const auto& a : indices_below(m))
        A = std::max({A, v.derivative_majorant(a.a1 + 1, a.a2), v.derivative_majorant(a.a1, a.a2 + 1)});
    return A;
}

namespace detail {

struct LojaWork {
    const FourierSeries2& v;
    double E, eps;
    MultiIndex m;
    const LojaOptions& opt;
    std::vector<MultiIndex> alphas;   // nonzero alpha <= m
    std::vector<Field> fields;        // d^alpha v, same order
    Field base;                       // v - E

    const Field& field(MultiIndex a) const {
        if (a.order() == 0) return base;
        for (std::size_t i = 0; i < alphas.size(); ++i)
            if (alphas[i] == a) return fields[i];
        throw std::logic_error("loja: alpha not prepared");
    }
    double grad_bound(MultiIndex a) const {
        const auto& f = field(a);
        return std::max(f.d1_bound, f.d2_bound);
    }
};

struct LojaPiece {
    std::vector<Rect> bad;
    std::vector<GoodCell> good;
    std::size_t direct_good = 0, refined = 0, splits = 0, absorbed_infeasible = 0, absorbed_uncertified = 0;
    double absorbed_area = 0.0;
    std::size_t validation_failures = 0, cov_violations = 0;
    double cov_ratio_max = 0.0;
    std::vector<std::size_t> order_hist;
};

// Path from alpha down to 0: reduce the larger component, ties reduce x2.
inline std::vector<MultiIndex> descent_path(MultiIndex a) {
    std::vector<MultiIndex> p{a};
    while (a.order() > 0) {
        if (a.a2 >= a.a1) --a.a2;
        else --a.a1;
        p.push_back(a);
    }
    return p;
}

// eps_j = eps^(1/3^(k-j)), j = 1..k; eps_0 is the certified bound c.
inline std::vector<double> ladder(double eps, double c, int k) {
    std::vector<double> e(static_cast<std::size_t>(k) + 1);
    e[0] = c;
    for (int j = 1; j <= k; ++j) e[static_cast<std::size_t>(j)] = std::pow(eps, 1.0 / std::pow(3.0, k - j));
    return e;
}

// First stage j (1-based) where eps_j < eps_{j-1} kappa_{j-1} / 4 fails, 0 if none.
inline int ladder_failure(const LojaWork& W, const std::vector<MultiIndex>& path, const std::vector<double>& e, double side) {
    double kappa = side;
    for (std::size_t j = 1; j < e.size(); ++j) {
        if (!(e[j] < e[j - 1] * kappa / 4)) return static_cast<int>(j);
        double A = W.grad_bound(path[j]);
        kappa = A > 0 ? std::min(kappa, e[j] / A) : kappa;
    }
    return 0;
}

inline void absorb(LojaPiece& P, const Rect& R, bool infeasible) {
    P.bad.push_back(R);
    P.absorbed_area += R.area();
    if (infeasible) ++P.absorbed_infeasible;
    else ++P.absorbed_uncertified;
}

inline void descend(const LojaWork& W, LojaPiece& P, const Rect& R, const std::vector<MultiIndex>& path,
                    const std::vector<double>& e, std::size_t j) {
    const std::size_t k = path.size() - 1;
    const Field& f = W.field(path[j]);
    // cells already far from the sublevel set need no strip cover
    double direct = certified_lower_bound(f, R, W.opt.cert_grid);
    if (direct >= e[j]) {
        if (j == k) P.good.push_back({R, direct});
        else descend(W, P, R, path, e, j + 1);  // |f_j| >= e_j on all of R
        return;
    }
    Axis axis = path[j - 1].a1 != path[j].a1 ? Axis::x1 : Axis::x2;
    double I = axis == Axis::x2 ? R.w1() : R.w2();
    if (!(e[j] < e[j - 1] * I / 4)) {
        if (W.opt.strict) throw std::runtime_error("ladder-infeasible at stage " + std::to_string(j) + " of " + std::to_string(k));
        absorb(P, R, true);
        return;
    }
    auto r = refine_step(f, R, e[j], e[j - 1], W.grad_bound(path[j]), axis, j < k, W.opt.C_cov);
    P.bad.insert(P.bad.end(), r.bad_rects.begin(), r.bad_rects.end());
    P.validation_failures += r.validation_failures;
    P.cov_ratio_max = std::max(P.cov_ratio_max, r.cov_ratio);
    if (!r.cov_ok) ++P.cov_violations;
    for (const auto& g : r.good) {
        if (j == k) P.good.push_back({g, e[j]});
        else descend(W, P, g, path, e, j + 1);
    }
}

inline void process_square(const LojaWork& W, LojaPiece& P, const Rect& R) {
    const int g = W.opt.cert_grid;
    double direct = certified_lower_bound(W.base, R, g);
    if (direct >= W.eps) {
        P.good.push_back({R, direct});
        ++P.direct_good;
        return;
    }
    struct Cand {
        MultiIndex a;
        double c;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < W.alphas.size(); ++i) {
        double c = certified_lower_bound(W.fields[i], R, g);
        if (c > 0.0) cands.push_back({W.alphas[i], c});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        return x.a.order() != y.a.order() ? x.a.order() < y.a.order() : x.c > y.c;
    });
    const double side = std::min(R.w1(), R.w2());
    int first_fail = 0;
    for (const auto& cd : cands) {
        auto path = descent_path(cd.a);
        auto e = ladder(W.eps, cd.c, cd.a.order());
        int fail = ladder_failure(W, path, e, side);
        if (fail == 0) {
            ++P.refined;
            auto o = static_cast<std::size_t>(cd.a.order());
            if (P.order_hist.size() <= o) P.order_hist.resize(o + 1);
            ++P.order_hist[o];
            descend(W, P, R, path, e, 1);
            return;
        }
        if (first_fail == 0) first_fail = fail;
    }
    if (0.5 * side >= W.opt.min_side) {
        ++P.splits;
        double m1 = 0.5 * (R.a1 + R.b1), m2 = 0.5 * (R.a2 + R.b2);
        process_square(W, P, {R.a1, m1, R.a2, m2});
        process_square(W, P, {R.a1, m1, m2, R.b2});
        process_square(W, P, {m1, R.b1, R.a2, m2});
        process_square(W, P, {m1, R.b1, m2, R.b2});
        return;
    }
    if (W.opt.strict) {
        if (cands.empty()) throw std::runtime_error("ladder-infeasible: no derivative <= m certified on a minimal square");
        throw std::runtime_error("ladder-infeasible at stage " + std::to_string(first_fail) + " on a minimal square");
    }
    absorb(P, R, !cands.empty());
}

}  // namespace detail

/// Sublevel cover of {|v - E| < eps}: the region is cut into starting squares
/// of side ~c/(2A); each square is either certified directly, handled by a
/// derivative ladder from the lowest certified d^alpha (alpha <= m), or split.
/// Squares that stay infeasible at min_side are absorbed into the bad set
/// (or raise in strict mode).
inline SublevelCover loja_pipeline(const FourierSeries2& v, double E, double eps, MultiIndex m, double c, double A,
                                   const LojaOptions& opt = {}) {
    if (!(eps > 0.0)) throw std::invalid_argument("loja_pipeline: eps must be positive");
    if (m.order() == 0) throw std::invalid_argument("loja_pipeline: m must be nonzero");
    if (!(c > 0.0) || !(A > 0.0)) throw std::invalid_argument("loja_pipeline: c and A must be positive");
    if (!opt.region.valid()) throw std::invalid_argument("loja_pipeline: empty region");
    detail::LojaWork W{v, E, eps, m, opt, indices_below(m), {}, series_field(v, {0, 0}, E)};
    for (const auto& a : W.alphas) W.fields.push_back(series_field(v, a));

    SublevelCover out;
    out.eps = eps;
    out.E = E;
    out.m = m;
    out.exponent_b = 1.0 / std::pow(3.0, m.order());
    int K = opt.start_grid;
    if (K <= 0) K = static_cast<int>(std::clamp(std::ceil(2 * A / c), 1.0, static_cast<double>(std::max(1, opt.max_start))));
    out.start_grid = K;
    const Rect& G = opt.region;
    auto pieces = parallel_map<detail::LojaPiece>(static_cast<std::size_t>(K) * K, opt.threads, [&](std::size_t idx) {
        std::size_t i = idx / K, j = idx % K;
        Rect R{G.a1 + G.w1() * i / K, i + 1 == static_cast<std::size_t>(K) ? G.b1 : G.a1 + G.w1() * (i + 1) / K,
               G.a2 + G.w2() * j / K, j + 1 == static_cast<std::size_t>(K) ? G.b2 : G.a2 + G.w2() * (j + 1) / K};
        detail::LojaPiece P;
        detail::process_square(W, P, R);
        return P;
    });
    double measure = 0.0;
    for (auto& P : pieces) {
        for (const auto& r : P.bad) measure += r.area();
        out.bad_rects.insert(out.bad_rects.end(), P.bad.begin(), P.bad.end());
        out.good.insert(out.good.end(), P.good.begin(), P.good.end());
        out.direct_good += P.direct_good;
        out.refined += P.refined;
        out.splits += P.splits;
        out.absorbed_infeasible += P.absorbed_infeasible;
        out.absorbed_uncertified += P.absorbed_uncertified;
        out.absorbed_area += P.absorbed_area;
        out.validation_failures += P.validation_failures;
        out.cov_violations += P.cov_violations;
        out.cov_ratio_max = std::max(out.cov_ratio_max, P.cov_ratio_max);
        if (out.order_hist.size() < P.order_hist.size()) out.order_hist.resize(P.order_hist.size());
        for (std::size_t o = 0; o < P.order_hist.size(); ++o) out.order_hist[o] += P.order_hist[o];
    }
    out.measure_bound = std::min(measure, G.area());
    return out;
}

struct CoverCheck {
    std::size_t grid_n = 0;
    std::size_t sublevel_points = 0;
    std::size_t escapes = 0;
    std::optional<Torus2Point> first_escape;
};

/// Cell-centred grid over the region: every point with |v - E| < eps must lie
/// in some bad rectangle.
inline CoverCheck cover_soundness(const SublevelCover& cov, const FourierSeries2& v, std::size_t grid_n = 1024,
                                  const Rect& region = {}) {
    constexpr std::size_t B = 256;
    std::vector<std::vector<std::uint32_t>> buckets(B * B);
    auto bx = [&](double x, double a, double w) {
        double t = (x - a) / w * B;
        return static_cast<std::size_t>(std::clamp(t, 0.0, static_cast<double>(B - 1)));
    };
    for (std::size_t r = 0; r < cov.bad_rects.size(); ++r) {
        const auto& R = cov.bad_rects[r];
        for (std::size_t i = bx(R.a1 - 1e-12, region.a1, region.w1()); i <= bx(R.b1 + 1e-12, region.a1, region.w1()); ++i)
            for (std::size_t j = bx(R.a2 - 1e-12, region.a2, region.w2()); j <= bx(R.b2 + 1e-12, region.a2, region.w2()); ++j)
                buckets[i * B + j].push_back(static_cast<std::uint32_t>(r));
    }
    CoverCheck out;
    out.grid_n = grid_n;
    for (std::size_t i = 0; i < grid_n; ++i) {
        double x1 = region.a1 + region.w1() * (i + 0.5) / grid_n;
        for (std::size_t j = 0; j < grid_n; ++j) {
            double x2 = region.a2 + region.w2() * (j + 0.5) / grid_n;
            if (!(std::fabs(v.eval(Torus2Point(x1, x2)) - cov.E) < cov.eps)) continue;
            ++out.sublevel_points;
            const auto& bk = buckets[bx(x1, region.a1, region.w1()) * B + bx(x2, region.a2, region.w2())];
            bool hit = std::any_of(bk.begin(), bk.end(), [&](std::uint32_t r) { return cov.bad_rects[r].contains(x1, x2); });
            if (!hit) {
                if (!out.first_escape) out.first_escape = Torus2Point(x1, x2);
                ++out.escapes;
            }
        }
    }
    return out;
}

struct McMeasure {
    double estimate = 0.0;
    double ci95 = 0.0;
    std::size_t samples = 0;
};

/// Fraction of uniform points with |v - E| < eps and its normal-approximation 95% half-width.
inline McMeasure mc_sublevel_measure(const FourierSeries2& v, double E, double eps, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples < 10000) throw std::invalid_argument("mc_sublevel_measure: n_samples must be >= 10^4");
    Rng rng(seed);
    std::size_t hit = 0;
    for (std::size_t i = 0; i < n_samples; ++i) hit += std::fabs(v.eval(rng.point()) - E) < eps;
    McMeasure out;
    out.samples = n_samples;
    out.estimate = static_cast<double>(hit) / static_cast<double>(n_samples);
    out.ci95 = 1.96 * std::sqrt(out.estimate * (1 - out.estimate) / static_cast<double>(n_samples));
    return out;
}

}  // namespace gevlab
