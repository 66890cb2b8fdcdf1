#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cocycle.hpp"
#include "dynamics.hpp"
#include "executor.hpp"
#include "fourier_series.hpp"
#include "sampling.hpp"

namespace gevlab {

namespace detail {
inline cplx fejer_direct(std::uint64_t n, double t) {
    CompensatedSum<> re, im;
    for (std::uint64_t k = 0; k < n; ++k) {
        double ph = two_pi * mul_mod1(k, t);
        re.add(std::cos(ph));
        im.add(std::sin(ph));
    }
    return cplx(re.value(), im.value()) / static_cast<double>(n);
}
}  // namespace detail

/// K_n(t) = (1/n) sum_{k<n} e(k t) = (1/n)(1 - e(n t)) / (1 - e(t)).
/// Uses 1 - e(s) = -2i sin(pi s) e(s/2) with centred representatives of s mod 1;
/// falls back to the direct sum when ||t|| < 1e-8.
inline cplx fejer_kernel(std::uint64_t n, double t) {
    if (n == 0) throw std::invalid_argument("fejer_kernel: n must be >= 1");
    const double tc = centered_mod1(t);
    if (std::fabs(tc) < 1e-8) return detail::fejer_direct(n, tc);
    const double sc = centered_mod1(mul_mod1(n, wrap01(t)));
    const double pi = two_pi / 2;
    double ratio = std::sin(pi * sc) / (static_cast<double>(n) * std::sin(pi * tc));
    return ratio * std::polar(1.0, pi * (sc - tc));
}

struct FejerCheck {
    double value = 0.0;  // |K_n(t)|
    double bound = 0.0;  // min{1, 1/(n ||t||)}
    bool ok = false;
};

inline FejerCheck fejer_bound_check(std::uint64_t n, double t) {
    FejerCheck c;
    c.value = std::abs(fejer_kernel(n, t));
    double d = torus_distance(t);
    c.bound = d == 0.0 ? 1.0 : std::min(1.0, 1.0 / (static_cast<double>(n) * d));
    c.ok = c.value <= c.bound + 1e-12;
    return c;
}

/// (1/n) sum_{j<n} u(T^j x)
template <class U>
double birkhoff_average(const U& u, const Torus2Point& x, const Transform& T, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("birkhoff_average: n must be >= 1");
    CompensatedSum<> s;
    for (std::uint64_t j = 0; j < n; ++j) s.add(u(iterate(x, T, j)));
    return s.value() / static_cast<double>(n);
}

struct FourierBirkhoff {
    double direct = 0.0;
    double spectral = 0.0;
    double gap = 0.0;
};

/// Compares the Birkhoff average of u with u(0) + sum_{l != 0} u(l) e(l.x) K_n(l.omega).
/// Only defined for the multi-shift.
inline FourierBirkhoff fourier_birkhoff_identity(const FourierSeries2& u, const Torus2Point& x, const Transform& T, std::uint64_t n) {
    const auto* m = std::get_if<MultiShift>(&T);
    if (!m) throw std::invalid_argument("fourier_birkhoff_identity: only the multi-shift is supported");
    FourierBirkhoff r;
    r.direct = birkhoff_average(u, x, T, n);
    CompensatedSum<> re, im;
    for (const auto& t : u.terms()) {
        cplx z = t.c;
        if (t.l1 != 0 || t.l2 != 0) {
            double ph = two_pi * wrap01(imul_mod1(t.l1, x.x1()) + imul_mod1(t.l2, x.x2()));
            double freq = wrap01(imul_mod1(t.l1, m->omega1) + imul_mod1(t.l2, m->omega2));
            z *= std::polar(1.0, ph) * fejer_kernel(n, freq);
        }
        re.add(z.real());
        im.add(z.imag());
    }
    r.spectral = re.value();
    r.gap = std::abs(cplx(r.direct - re.value(), -im.value()));
    return r;
}

/// Observable whose Birkhoff averages are measured: a series, or x -> L_{N0}(x).
struct FiniteLeSource {
    CocycleParams params;
    long N0 = 20;
};
using AverageSource = std::variant<FourierSeries2, FiniteLeSource>;

/// threshold(n) = c n^{-tau}
struct ThresholdRule {
    double c = 1.0;
    double tau = 0.25;
    double at(std::uint64_t n) const { return c * std::pow(static_cast<double>(n), -tau); }
};

struct DeviationRow {
    std::uint64_t n = 0;
    double threshold = 0.0;
    double fraction = 0.0;
    std::size_t samples = 0;
    std::string source;
    std::string mean_kind;  // "zero-mode" or "sample-mean"
    double mean = 0.0;
};

struct DeviationOptions {
    ThresholdRule rule;
    std::size_t sample_n = 1000;
    std::uint64_t seed = 1;
    PhaseMode mode = PhaseMode::lowdisc;
    unsigned threads = 1;
};

/// Fraction of phases whose n-step Birkhoff average of the source deviates
/// from the mean by more than the threshold, for each n in `scales`.
inline std::vector<DeviationRow> deviation_measure_curve(const AverageSource& src, const Transform& T,
                                                         std::span<const std::uint64_t> scales, const DeviationOptions& opt = {}) {
    if (opt.sample_n < 1000) throw std::invalid_argument("deviation_measure_curve: sample_n must be >= 1000");
    if (scales.empty()) throw std::invalid_argument("deviation_measure_curve: no scales");
    std::vector<std::uint64_t> sorted(scales.begin(), scales.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == 0) throw std::invalid_argument("deviation_measure_curve: scales must be >= 1");
    const std::uint64_t n_max = sorted.back();
    auto phases = phase_set(opt.mode, opt.sample_n, opt.seed);
    const std::size_t P = phases.size();

    std::function<double(const Torus2Point&)> u;
    std::string name, mean_kind;
    if (const auto* s = std::get_if<FourierSeries2>(&src)) {
        u = [s](const Torus2Point& y) { return s->eval(y); };
        name = "series";
        mean_kind = "zero-mode";
    } else {
        const auto& f = std::get<FiniteLeSource>(src);
        u = [&f](const Torus2Point& y) { return finite_le(y, f.params, f.N0); };
        name = "finite_le:N0=" + std::to_string(f.N0);
        mean_kind = "sample-mean";
    }

    // partial[p][k] = running Birkhoff average of phase p at sorted[k]; u(x) kept for the sample mean
    std::vector<double> avg(P * sorted.size()), first(P);
    parallel_for(P, opt.threads, [&](std::size_t p) {
        CompensatedSum<> s;
        std::size_t k = 0;
        for (std::uint64_t j = 0; j < n_max; ++j) {
            double val = u(iterate(phases[p], T, j));
            if (j == 0) first[p] = val;
            s.add(val);
            while (k < sorted.size() && sorted[k] == j + 1) avg[p * sorted.size() + k++] = s.value() / static_cast<double>(j + 1);
        }
    });
    double mean = mean_kind == "zero-mode" ? std::get<FourierSeries2>(src).zero_mode() : mean_std(first).mean;

    std::vector<DeviationRow> rows;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        DeviationRow r;
        r.n = sorted[k];
        r.threshold = opt.rule.at(r.n);
        std::size_t bad = 0;
        for (std::size_t p = 0; p < P; ++p) bad += std::fabs(avg[p * sorted.size() + k] - mean) > r.threshold;
        r.fraction = static_cast<double>(bad) / static_cast<double>(P);
        r.samples = P;
        r.source = name;
        r.mean_kind = mean_kind;
        r.mean = mean;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace gevlab
