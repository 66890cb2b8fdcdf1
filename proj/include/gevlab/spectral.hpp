#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cocycle.hpp"
#include "sampling.hpp"

namespace gevlab {

/// Dirichlet restriction of the operator to [1, N]: diag[n-1] = lambda v(T^n x),
/// off-diagonal entries -1.
struct BoxHamiltonian {
    std::vector<double> diag;
    double off = -1.0;

    std::size_t size() const { return diag.size(); }
};

inline BoxHamiltonian build_box(const Torus2Point& x, const CocycleParams& p, long N) {
    if (N < 1) throw std::invalid_argument("build_box: N must be >= 1");
    BoxHamiltonian h;
    h.diag.resize(static_cast<std::size_t>(N));
    for (long n = 1; n <= N; ++n) h.diag[static_cast<std::size_t>(n - 1)] = p.lambda * p.v.eval(iterate(x, p.T, static_cast<std::uint64_t>(n)));
    return h;
}

/// Sign and log-modulus of a real number; log_abs = -inf for zero.
struct LogValue {
    double sign = 1.0;
    double log_abs = 0.0;

    double value() const { return sign * std::exp(log_abs); }
};

/// LU with partial pivoting of a tridiagonal matrix (the dgttrf scheme):
/// U has two superdiagonals, L is unit lower bidiagonal up to row swaps.
class TridiagLU {
public:
    TridiagLU(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup)
        : dl_(std::move(sub)), d_(std::move(diag)), du_(std::move(sup)) {
        const std::size_t n = d_.size();
        if (n == 0 || dl_.size() + 1 != n || du_.size() + 1 != n) throw std::invalid_argument("TridiagLU: bad band sizes");
        du2_.assign(n, 0.0);
        swap_.assign(n, false);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (std::fabs(d_[i]) >= std::fabs(dl_[i])) {
                double f = d_[i] != 0.0 ? dl_[i] / d_[i] : 0.0;
                dl_[i] = f;
                d_[i + 1] -= f * du_[i];
            } else {
                double f = d_[i] / dl_[i];
                d_[i] = dl_[i];
                dl_[i] = f;
                double t = du_[i];
                du_[i] = d_[i + 1];
                d_[i + 1] = t - f * d_[i + 1];
                if (i + 2 < n) {
                    du2_[i] = du_[i + 1];
                    du_[i + 1] = -f * du_[i + 1];
                }
                swap_[i] = true;
            }
        }
    }

    std::size_t size() const { return d_.size(); }

    LogValue log_det() const {
        LogValue r;
        for (std::size_t i = 0; i < d_.size(); ++i) {
            if (d_[i] == 0.0) return {0.0, -std::numeric_limits<double>::infinity()};
            if (d_[i] < 0) r.sign = -r.sign;
            if (swap_[i]) r.sign = -r.sign;
            r.log_abs += std::log(std::fabs(d_[i]));
        }
        return r;
    }

    bool singular() const {
        return std::any_of(d_.begin(), d_.end(), [](double x) { return x == 0.0; });
    }

    /// Solves A y = b in place.
    void solve(std::vector<double>& b) const {
        const std::size_t n = d_.size();
        if (b.size() != n) throw std::invalid_argument("TridiagLU::solve: size mismatch");
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (!swap_[i]) {
                b[i + 1] -= dl_[i] * b[i];
            } else {
                double t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - dl_[i] * b[i];
            }
        }
        b[n - 1] /= d_[n - 1];
        if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
        for (std::size_t k = n < 2 ? 0 : n - 2; k-- > 0;) b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
    }

private:
    std::vector<double> dl_, d_, du_, du2_;
    std::vector<bool> swap_;
};

/// det[H - E] of the sub-box on sites [lo, hi] (1-based, inclusive) by pivoted
/// elimination; an empty box has determinant 1, a box of size -1 has 0.
inline LogValue box_log_det(const BoxHamiltonian& h, long lo, long hi, double E) {
    long n = hi - lo + 1;
    if (n == 0) return {1.0, 0.0};
    if (n == -1) return {0.0, -std::numeric_limits<double>::infinity()};
    if (n < -1 || lo < 1 || hi > static_cast<long>(h.size())) throw std::invalid_argument("box_log_det: bad range");
    std::vector<double> d(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = h.diag[static_cast<std::size_t>(lo - 1 + i)] - E;
    std::vector<double> off(static_cast<std::size_t>(n - 1), h.off);
    return TridiagLU(off, std::move(d), off).log_det();
}

struct DetTransferIdentity {
    std::array<double, 4> m_entries{};    // M_N entries a, b, c, d (scaled by exp(-log_scale))
    std::array<double, 4> det_values{};   // det H_N, -det H_{N-1}(Tx), det H_{N-1}, -det H_{N-2}(Tx), same scale
    double log_scale = 0.0;
    double max_gap = 0.0;                 // max entry difference relative to the largest entry
    bool overflow = false;                // unscaled values do not fit in a double
};

/// Checks M_N(x, E) against the four box determinants. The comparison is
/// made after dividing both sides by the scale of M_N.
inline DetTransferIdentity det_transfer_identity(const Torus2Point& x, const CocycleParams& p, long N) {
    if (N < 1) throw std::invalid_argument("det_transfer_identity: N must be >= 1");
    auto M = transfer_product(x, p, N);
    auto h = build_box(x, p, N);
    DetTransferIdentity r;
    r.log_scale = M.log_scale();
    auto m = M.mat();
    r.m_entries = {m.a, m.b, m.c, m.d};
    std::array<LogValue, 4> dets{box_log_det(h, 1, N, p.E), box_log_det(h, 2, N, p.E), box_log_det(h, 1, N - 1, p.E),
                                 box_log_det(h, 2, N - 1, p.E)};
    const std::array<double, 4> sgn{1.0, -1.0, 1.0, -1.0};
    double biggest = 0.0;
    for (int k = 0; k < 4; ++k) {
        r.det_values[k] = sgn[k] * dets[k].sign * std::exp(dets[k].log_abs - r.log_scale);
        if (dets[k].log_abs > 700.0) r.overflow = true;
        biggest = std::max({biggest, std::fabs(r.m_entries[k]), std::fabs(r.det_values[k])});
    }
    for (int k = 0; k < 4; ++k) r.max_gap = std::max(r.max_gap, std::fabs(r.m_entries[k] - r.det_values[k]) / biggest);
    return r;
}

struct EigenSystem {
    std::vector<double> values;                // ascending
    std::vector<std::vector<double>> vectors;  // vectors[k] belongs to values[k]
};

/// Eigenvalues (and optionally eigenvectors) of a symmetric tridiagonal matrix
/// by implicit-shift QL (the tql2 scheme).
inline EigenSystem tridiagonal_eigen(std::vector<double> d, std::vector<double> offdiag, bool vectors = true) {
    const std::size_t n = d.size();
    if (n == 0 || offdiag.size() + 1 != n) throw std::invalid_argument("tridiagonal_eigen: bad sizes");
    std::vector<double> e(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) e[i] = offdiag[i];
    std::vector<std::vector<double>> V;
    if (vectors) {
        V.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) V[i][i] = 1.0;
    }
    const double eps = std::numeric_limits<double>::epsilon();
    double f = 0.0, tst1 = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::fabs(d[l]) + std::fabs(e[l]));
        std::size_t m = l;
        while (m < n - 1 && std::fabs(e[m]) > eps * tst1) ++m;
        if (m > l) {
            int iter = 0;
            do {
                if (++iter > 60) throw std::runtime_error("tridiagonal_eigen: no convergence");
                double g = d[l];
                double pp = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(pp, 1.0);
                if (pp < 0) r = -r;
                d[l] = e[l] / (pp + r);
                d[l + 1] = e[l] * (pp + r);
                double dl1 = d[l + 1];
                double hh = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= hh;
                f += hh;
                pp = d[m];
                double c = 1.0, c2 = c, c3 = c, el1 = e[l + 1], s = 0.0, s2 = 0.0;
                for (std::size_t i = m; i-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    hh = c * pp;
                    r = std::hypot(pp, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = pp / r;
                    pp = c * d[i] - s * g;
                    d[i + 1] = hh + s * (c * g + s * d[i]);
                    if (vectors) {
                        auto& vi = V[i];
                        auto& vj = V[i + 1];
                        for (std::size_t k = 0; k < n; ++k) {
                            double t = vj[k];
                            vj[k] = s * vi[k] + c * t;
                            vi[k] = c * vi[k] - s * t;
                        }
                    }
                }
                pp = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * pp;
                d[l] = c * pp;
            } while (std::fabs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    EigenSystem out;
    out.values.reserve(n);
    for (auto k : idx) out.values.push_back(d[k]);
    if (vectors) {
        out.vectors.reserve(n);
        for (auto k : idx) out.vectors.push_back(std::move(V[k]));
    }
    return out;
}

inline EigenSystem box_eigen(const BoxHamiltonian& h, bool vectors = true) {
    return tridiagonal_eigen(h.diag, std::vector<double>(h.size() - 1, h.off), vectors);
}

struct CramerCheck {
    long n1 = 0, n2 = 0;
    double g_abs = 0.0;
    double log_g = 0.0;
    double log_bound = 0.0;  // log(||M_n1(x)|| ||M_{N-n2}(T^n2 x)|| / |det(H_N - E)|)
    bool ok = false;
};

struct GreenFunction {
    long N = 0;
    std::vector<double> G;  // row-major N x N
    double residual = 0.0;  // max |(H - E) G - I|
    double nearest_eigenvalue = 0.0;
    double distance = 0.0;
    LogValue det;
    std::vector<CramerCheck> cramer;
    bool cramer_ok = true;

    double at(long n1, long n2) const { return G[static_cast<std::size_t>((n1 - 1) * N + (n2 - 1))]; }
};

/// (H_N - E)^{-1} by pivoted tridiagonal solves, with the residual and the
/// Cramer-rule bound checked on `pairs` random (n1 <= n2).
inline GreenFunction green_function(const Torus2Point& x, const CocycleParams& p, long N, int pairs = 20, std::uint64_t seed = 1) {
    auto h = build_box(x, p, N);
    auto eig = box_eigen(h, false);
    GreenFunction g;
    g.N = N;
    auto it = std::min_element(eig.values.begin(), eig.values.end(),
                               [&](double a, double b) { return std::fabs(a - p.E) < std::fabs(b - p.E); });
    g.nearest_eigenvalue = *it;
    g.distance = std::fabs(*it - p.E);
    if (g.distance < 1e-10) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "green_function: E=%.17g is within 1e-10 of eigenvalue %.17g", p.E, *it);
        throw std::domain_error(buf);
    }
    const std::size_t n = static_cast<std::size_t>(N);
    std::vector<double> d(n), off(n - 1, h.off);
    for (std::size_t i = 0; i < n; ++i) d[i] = h.diag[i] - p.E;
    TridiagLU lu(off, d, off);
    g.det = lu.log_det();
    g.G.assign(n * n, 0.0);
    std::vector<double> col(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::fill(col.begin(), col.end(), 0.0);
        col[j] = 1.0;
        lu.solve(col);
        for (std::size_t i = 0; i < n; ++i) g.G[i * n + j] = col[i];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = d[i] * g.G[i * n + j];
            if (i > 0) s += h.off * g.G[(i - 1) * n + j];
            if (i + 1 < n) s += h.off * g.G[(i + 1) * n + j];
            g.residual = std::max(g.residual, std::fabs(s - (i == j ? 1.0 : 0.0)));
        }
    Rng rng(seed);
    for (int k = 0; k < pairs; ++k) {
        long a = 1 + static_cast<long>(rng.index(n)), b = 1 + static_cast<long>(rng.index(n));
        CramerCheck c;
        c.n1 = std::min(a, b);
        c.n2 = std::max(a, b);
        c.g_abs = std::fabs(g.at(c.n1, c.n2));
        c.log_g = std::log(c.g_abs);
        double left = transfer_product(x, p, c.n1).log_norm();
        double right = transfer_product(iterate(x, p.T, static_cast<std::uint64_t>(c.n2)), p, N - c.n2).log_norm();
        c.log_bound = left + right - g.det.log_abs;
        c.ok = c.log_g <= c.log_bound + 1e-9 * (1.0 + std::fabs(c.log_bound));
        g.cramer_ok = g.cramer_ok && c.ok;
        g.cramer.push_back(c);
    }
    return g;
}

/// Largest |G| entry and log|det| for the four boxes [1,N], [1,N-1], [2,N], [2,N-1].
struct BoxGreenSummary {
    long lo = 1, hi = 1;
    double max_abs_g = 0.0;
    double log_abs_det = 0.0;
};

inline std::vector<BoxGreenSummary> four_box_green(const Torus2Point& x, const CocycleParams& p, long N) {
    if (N < 3) throw std::invalid_argument("four_box_green: N must be >= 3");
    auto h = build_box(x, p, N);
    std::vector<BoxGreenSummary> out;
    for (auto [lo, hi] : {std::pair{1L, N}, std::pair{1L, N - 1}, std::pair{2L, N}, std::pair{2L, N - 1}}) {
        std::size_t n = static_cast<std::size_t>(hi - lo + 1);
        std::vector<double> d(n), off(n - 1, h.off);
        for (std::size_t i = 0; i < n; ++i) d[i] = h.diag[static_cast<std::size_t>(lo - 1) + i] - p.E;
        TridiagLU lu(off, d, off);
        BoxGreenSummary s{lo, hi, 0.0, lu.log_det().log_abs};
        if (!lu.singular()) {
            std::vector<double> col(n);
            for (std::size_t j = 0; j < n; ++j) {
                std::fill(col.begin(), col.end(), 0.0);
                col[j] = 1.0;
                lu.solve(col);
                for (double v : col) s.max_abs_g = std::max(s.max_abs_g, std::fabs(v));
            }
        } else {
            s.max_abs_g = std::numeric_limits<double>::infinity();
        }
        out.push_back(s);
    }
    return out;
}

struct EigenDecay {
    std::size_t index = 0;
    double eigenvalue = 0.0;
    long center = 0;  // 0-based site
    double gamma = 0.0;
    double r2 = 0.0;
    double tail_mass = 0.0;
    std::size_t fit_points = 0;
};

struct LocalizationReport {
    long N = 0;
    std::vector<EigenDecay> states;
    double median_gamma_mid = 0.0;  // over indices [N/4, 3N/4)
    double median_r2_mid = 0.0;
};

/// Fits -log|psi_n| against |n - center| on sites with |psi_n| > floor,
/// skipping the centre and its two neighbours and any side whose tail has
/// not decayed below the floor at the box edge.
inline EigenDecay fit_decay(const std::vector<double>& psi, double floor = 1e-12) {
    EigenDecay r;
    const long n = static_cast<long>(psi.size());
    long c = 0;
    for (long i = 1; i < n; ++i)
        if (std::fabs(psi[static_cast<std::size_t>(i)]) > std::fabs(psi[static_cast<std::size_t>(c)])) c = i;
    r.center = c;
    for (long i = 0; i < n; ++i)
        if (std::labs(i - c) > 3) r.tail_mass += psi[static_cast<std::size_t>(i)] * psi[static_cast<std::size_t>(i)];
    std::vector<double> xs, ys;
    auto side = [&](long from, long to, long stepdir) {
        // from: first site past the exclusion zone; to: box edge
        long edge = to;
        if (std::fabs(psi[static_cast<std::size_t>(edge)]) > floor) return;
        for (long i = from; stepdir > 0 ? i <= to : i >= to; i += stepdir) {
            double a = std::fabs(psi[static_cast<std::size_t>(i)]);
            if (a > floor) {
                xs.push_back(static_cast<double>(std::labs(i - c)));
                ys.push_back(-std::log(a));
            }
        }
    };
    if (c + 2 <= n - 1) side(c + 2, n - 1, 1);
    if (c - 2 >= 0) side(c - 2, 0, -1);
    r.fit_points = xs.size();
    if (xs.size() >= 3) {
        auto fit = linear_fit(xs, ys);
        r.gamma = fit.slope;
        r.r2 = fit.r2;
    }
    return r;
}

inline LocalizationReport eigen_decay_report(const Torus2Point& x, const CocycleParams& p, long N) {
    if (N < 16) throw std::invalid_argument("eigen_decay_report: N must be >= 16");
    auto eig = box_eigen(build_box(x, p, N), true);
    LocalizationReport rep;
    rep.N = N;
    for (std::size_t k = 0; k < eig.values.size(); ++k) {
        auto d = fit_decay(eig.vectors[k]);
        d.index = k;
        d.eigenvalue = eig.values[k];
        rep.states.push_back(d);
    }
    std::vector<double> gs, rs;
    for (std::size_t k = static_cast<std::size_t>(N / 4); k < static_cast<std::size_t>(3 * N / 4); ++k) {
        gs.push_back(rep.states[k].gamma);
        rs.push_back(rep.states[k].r2);
    }
    rep.median_gamma_mid = median(gs);
    rep.median_r2_mid = median(rs);
    return rep;
}

}  // namespace gevlab
