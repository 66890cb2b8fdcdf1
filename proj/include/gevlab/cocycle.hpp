#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dynamics.hpp"
#include "executor.hpp"
#include "fourier_series.hpp"
#include "sampling.hpp"
#include "sl2.hpp"

namespace gevlab {

struct CocycleParams {
    double lambda = 0.0;
    double E = 0.0;
    FourierSeries2 v;
    Transform T = SkewShift{};
};

/// [[lambda v(x) - E, -1], [1, 0]]
inline SL2 step_matrix(const Torus2Point& x, const CocycleParams& p) { return {p.lambda * p.v.eval(x) - p.E, -1.0, 1.0, 0.0}; }

/// M_N(x) = A(T^N x) ... A(T x).
inline ScaledProduct transfer_product(const Torus2Point& x, const CocycleParams& p, long N) {
    if (N < 0) throw std::invalid_argument("transfer_product: N must be >= 0");
    ScaledProduct acc;
    for (long j = 1; j <= N; ++j) acc.left_multiply(step_matrix(iterate(x, p.T, static_cast<std::uint64_t>(j)), p));
    return acc;
}

/// (1/N) log ||M_N(x)||
inline double finite_le(const Torus2Point& x, const CocycleParams& p, long N) {
    if (N < 1) throw std::invalid_argument("finite_le: N must be >= 1");
    return transfer_product(x, p, N).log_norm() / static_cast<double>(N);
}

/// Phase average of finite_le over an arbitrary point set; the reduction
/// order is fixed, so the result does not depend on `threads`.
inline MeanStd mean_finite_le(const CocycleParams& p, long N, std::span<const Torus2Point> phases, unsigned threads = 1) {
    auto vals = parallel_map<double>(phases.size(), threads, [&](std::size_t i) { return finite_le(phases[i], p, N); });
    return mean_std(vals);
}

/// Mean over the grid_n x grid_n grid shifted by `offset` cells.
inline MeanStd mean_finite_le(const CocycleParams& p, long N, int grid_n, double offset = 0.5, unsigned threads = 1) {
    if (grid_n < 4) throw std::invalid_argument("mean_finite_le: grid_n must be >= 4");
    auto phases = grid_phases(grid_n, offset);
    return mean_finite_le(p, N, phases, threads);
}

/// S(lambda) = log(2|lambda| B + 4); bounds log ||A|| for |E| <= 2 + |lambda| B.
inline double scaling_factor(double lambda, double B) { return std::log(2.0 * std::fabs(lambda) * B + 4.0); }

/// B for a series: the coefficient majorant sum |c(l)| >= sup |v|.
inline double potential_bound(const FourierSeries2& v) { return v.sup_bound(); }

inline std::pair<double, double> spectrum_interval(double lambda, double B) {
    double r = 2.0 + std::fabs(lambda) * B;
    return {-r, r};
}

struct AlmostInvariance {
    double defect = 0.0;
    double bound = 0.0;
    bool ok = false;
};

/// |L_N(x) - L_N(Tx)| against 2S/N.
inline AlmostInvariance almost_invariance_defect(const Torus2Point& x, const CocycleParams& p, long N) {
    AlmostInvariance r;
    double a = finite_le(x, p, N);
    double b = finite_le(step(x, p.T), p, N);
    r.defect = std::fabs(a - b);
    r.bound = 2.0 * scaling_factor(p.lambda, potential_bound(p.v)) / static_cast<double>(N);
    r.ok = r.defect <= r.bound * (1.0 + 1e-12);
    return r;
}

struct TrotterGap {
    double gap = 0.0;         // ||M_N - M~_N|| from the telescoped difference
    double direct_gap = 0.0;  // same, by subtracting the two products
    double bound = 0.0;
    double tail_sup = 0.0;
    bool ok = false;
};

/// Compares M_N built from v with the product built from truncate(v, N_tilde).
/// The difference is evaluated as sum_j A_N..A_{j+1} (A_j - A~_j) A~_{j-1}..A~_1
/// with A_j - A~_j = diag(lambda (v - v_N~)(T^j x), 0), so no cancellation
/// occurs. The supremum of the tail is taken over a grid and the orbit.
inline TrotterGap trotter_gap(const Torus2Point& x, const CocycleParams& p, long N, int N_tilde, int sup_grid_n = 256) {
    using LD = long double;
    if (N < 1) throw std::invalid_argument("trotter_gap: N must be >= 1");
    const FourierSeries2 vt = p.v.truncate(N_tilde);
    const FourierSeries2 tail = p.v.tail(N_tilde);
    const double B = std::max(potential_bound(p.v), potential_bound(vt));
    const double S = scaling_factor(p.lambda, B);
    if (static_cast<double>(N) * S > 600.0) throw std::range_error("trotter_gap: N*S exceeds 600");

    std::vector<Mat2T<LD>> A(N + 1), At(N + 1);
    std::vector<LD> diff(N + 1, 0.0L);
    TrotterGap r;
    for (long j = 1; j <= N; ++j) {
        Torus2Point y = iterate(x, p.T, static_cast<std::uint64_t>(j));
        double tv = tail.empty() ? 0.0 : tail.eval(y);
        r.tail_sup = std::max(r.tail_sup, std::fabs(tv));
        diff[j] = static_cast<LD>(p.lambda) * tv;
        A[j] = {static_cast<LD>(p.lambda * p.v.eval(y) - p.E), -1, 1, 0};
        At[j] = {static_cast<LD>(p.lambda * vt.eval(y) - p.E), -1, 1, 0};
    }
    if (!tail.empty())
        for (double t : tail.eval_grid(sup_grid_n)) r.tail_sup = std::max(r.tail_sup, std::fabs(t));

    // suffix[j] = A_N ... A_{j+1}
    std::vector<Mat2T<LD>> suffix(N + 1);
    for (long j = N - 1; j >= 0; --j) suffix[j] = suffix[j + 1] * A[j + 1];
    Mat2T<LD> sum{0, 0, 0, 0}, prefix{};
    for (long j = 1; j <= N; ++j) {
        if (diff[j] != 0) {
            Mat2T<LD> term = suffix[j] * Mat2T<LD>{diff[j], 0, 0, 0} * prefix;
            sum = {sum.a + term.a, sum.b + term.b, sum.c + term.c, sum.d + term.d};
        }
        prefix = At[j] * prefix;
    }
    r.gap = static_cast<double>(spectral_norm(sum));
    Mat2T<LD> full = suffix[0];
    r.direct_gap = static_cast<double>(
        spectral_norm(Mat2T<LD>{full.a - prefix.a, full.b - prefix.b, full.c - prefix.c, full.d - prefix.d}));
    r.bound = static_cast<double>(N) * std::fabs(p.lambda) * std::exp(static_cast<double>(N - 1) * S) * r.tail_sup;
    r.ok = r.gap <= r.bound * (1.0 + 1e-12);
    return r;
}

/// A_j = M_{N0}(T^{(j-1) N0} x) for j = 1..n.
inline std::vector<ScaledProduct> orbit_blocks(const Torus2Point& x, const CocycleParams& p, long N0, std::size_t n) {
    std::vector<ScaledProduct> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j)
        out.push_back(transfer_product(iterate(x, p.T, static_cast<std::uint64_t>(j * N0)), p, N0));
    return out;
}

inline double min_block_norm(std::span<const ScaledProduct> blocks) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& b : blocks) lo = std::min(lo, b.log_norm());
    return std::exp(lo);
}

struct AvalancheReport {
    double residual = 0.0;
    bool hyp_ok = false;
    double mu = 0.0;
    double bound = 0.0;  // C_ap n / mu
    std::size_t n = 0;
    double log_min_norm = 0.0;
    double max_pair_defect = 0.0;
};

/// |log||A_n..A_1|| + sum_{j=2}^{n-1} log||A_j|| - sum_{j=1}^{n-1} log||A_{j+1} A_j|||,
/// evaluated in quad precision on the stored factorizations.
inline AvalancheReport avalanche_residual(std::span<const ScaledProduct> blocks, double mu, double C_ap = 10.0) {
    const std::size_t n = blocks.size();
    if (n < 2) throw std::invalid_argument("avalanche_residual: need at least two blocks");
    if (!(mu > 0.0)) throw std::invalid_argument("avalanche_residual: mu must be positive");
    std::vector<QuadProduct> q;
    q.reserve(n);
    for (const auto& b : blocks) q.push_back(b.convert<quad>());

    AvalancheReport r;
    r.n = n;
    r.mu = mu;
    r.bound = C_ap * static_cast<double>(n) / mu;
    std::vector<quad> ln(n);
    quad lo = 1e300;
    for (std::size_t j = 0; j < n; ++j) {
        ln[j] = q[j].log_norm();
        lo = std::min(lo, ln[j]);
    }
    r.log_min_norm = static_cast<double>(lo);
    const quad half_log_mu = rmath::log(static_cast<quad>(mu)) / 2;
    bool pairs_ok = true;
    CompensatedSum<quad> acc;
    QuadProduct full = q[0];
    for (std::size_t j = 0; j + 1 < n; ++j) {
        quad lp = (q[j + 1] * q[j]).log_norm();
        quad defect = ln[j + 1] + ln[j] - lp;
        r.max_pair_defect = std::max(r.max_pair_defect, static_cast<double>(defect));
        if (defect > half_log_mu) pairs_ok = false;
        acc.add(-lp);
        full = q[j + 1] * full;
    }
    for (std::size_t j = 1; j + 1 < n; ++j) acc.add(ln[j]);
    acc.add(full.log_norm());
    r.residual = static_cast<double>(rmath::abs(acc.value()));
    // mu is usually the measured minimum, so allow for its round trip through exp
    r.hyp_ok = lo >= rmath::log(static_cast<quad>(mu)) - quad(1e-12) && mu >= static_cast<double>(n) && pairs_ok;
    return r;
}

}  // namespace gevlab
