#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fourier_series.hpp"
#include "sampling.hpp"

namespace gevlab {

/// |c(l)| <= M exp(-rho |l|^{1/s}).
struct GevreyParams {
    double s = 2.0;
    double rho = 1.0;
    double M = 1.0;
};

struct GevreyCheck {
    bool valid = false;
    bool analytic_warning = false;  // s == 1
};

inline GevreyCheck check_gevrey(const GevreyParams& p) {
    GevreyCheck c;
    c.valid = p.s >= 1.0 && p.rho > 0.0 && p.M > 0.0;
    c.analytic_warning = c.valid && p.s == 1.0;
    return c;
}

inline void require_gevrey(const GevreyParams& p) {
    if (!check_gevrey(p).valid) throw std::invalid_argument("gevrey: need s >= 1, rho > 0, M > 0");
}

/// Number of l in Z^2 with |l1| + |l2| <= d.
inline std::size_t lattice_ball_size(long d) { return static_cast<std::size_t>(2 * d * (d + 1) + 1); }

struct TruncationPlan {
    long N = 0;
    long N_tilde = 0;  // ceil(N^{2s}), possibly capped
    bool capped = false;
    long cap_degree = 0;
    double delta = 0.0;  // 2(s-1)
    double rho1 = 0.0;   // (rho/2) N^{-delta}
};

inline TruncationPlan plan_truncation(const GevreyParams& p, long N, std::size_t max_coefficients = 10000) {
    require_gevrey(p);
    if (N < 1) throw std::invalid_argument("plan_truncation: N must be >= 1");
    TruncationPlan t;
    t.N = N;
    long d = 0;
    while (lattice_ball_size(d + 1) <= max_coefficients) ++d;
    t.cap_degree = d;
    double raw = std::ceil(std::pow(static_cast<double>(N), 2.0 * p.s));
    if (raw > static_cast<double>(d)) {
        t.N_tilde = d;
        t.capped = true;
    } else {
        t.N_tilde = static_cast<long>(raw);
    }
    t.delta = 2.0 * (p.s - 1.0);
    t.rho1 = 0.5 * p.rho * std::pow(static_cast<double>(N), -t.delta);
    return t;
}

struct TailBound {
    double value = 0.0;
    bool underflow = false;
    long terms = 0;
};

/// sum_{k > N_tilde} 4k M exp(-rho k^{1/s}); 4k counts the l with |l| = k.
/// Summation stops once terms are past their peak and below 1e-300.
inline TailBound gevrey_tail_bound(const GevreyParams& p, long N_tilde) {
    require_gevrey(p);
    const double floor_log = std::log(1e-300);
    const double k_peak = std::pow(p.s / p.rho, p.s);
    CompensatedSum<> sum;
    TailBound out;
    bool any = false;
    for (long k = std::max(N_tilde, 0L) + 1;; ++k) {
        double kd = static_cast<double>(k);
        double lg = std::log(4.0 * kd * p.M) - p.rho * std::pow(kd, 1.0 / p.s);
        if (lg < floor_log) {
            if (kd > k_peak) break;
            continue;
        }
        sum.add(std::exp(lg));
        any = true;
        ++out.terms;
        if (k > 2'000'000'000L) throw std::runtime_error("gevrey_tail_bound: series did not converge");
    }
    out.value = sum.value();
    out.underflow = !any;
    return out;
}

/// c(l) = M exp(-rho |l|^{1/s}) for 0 < |l| <= degree. With a seed the
/// coefficients get random phases (Hermitian-paired).
inline FourierSeries2 gevrey_series(const GevreyParams& p, int degree, std::optional<std::uint64_t> phase_seed = {}) {
    require_gevrey(p);
    std::vector<Term> terms;
    std::optional<Rng> rng;
    if (phase_seed) rng.emplace(*phase_seed);
    for (int l1 = 0; l1 <= degree; ++l1) {
        for (int l2 = (l1 == 0 ? 1 : -(degree - l1)); l2 <= degree - l1; ++l2) {
            double mag = p.M * std::exp(-p.rho * std::pow(static_cast<double>(l1 + std::abs(l2)), 1.0 / p.s));
            cplx c = mag;
            if (rng) c = std::polar(mag, two_pi * rng->uniform());
            terms.push_back({l1, l2, c});
            terms.push_back({-l1, -l2, std::conj(c)});
        }
    }
    return FourierSeries2(std::move(terms));
}

}  // namespace gevlab
