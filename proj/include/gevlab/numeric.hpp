#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <quadmath.h>

namespace gevlab {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

using quad = __float128;

/// Math shim so templates can run on double, long double and __float128.
namespace rmath {
inline double log(double x) { return std::log(x); }
inline double exp(double x) { return std::exp(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double abs(double x) { return std::fabs(x); }
inline double hypot(double x, double y) { return std::hypot(x, y); }

inline long double log(long double x) { return std::log(x); }
inline long double exp(long double x) { return std::exp(x); }
inline long double sqrt(long double x) { return std::sqrt(x); }
inline long double abs(long double x) { return std::fabs(x); }
inline long double hypot(long double x, long double y) { return std::hypot(x, y); }

inline quad log(quad x) { return logq(x); }
inline quad exp(quad x) { return expq(x); }
inline quad sqrt(quad x) { return sqrtq(x); }
inline quad abs(quad x) { return fabsq(x); }
inline quad hypot(quad x, quad y) { return hypotq(x, y); }
}  // namespace rmath

/// Neumaier-compensated running sum.
template <class Real = double>
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(Real init) : sum_(init) {}

    void add(Real x) {
        Real t = sum_ + x;
        if (rmath::abs(sum_) >= rmath::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(Real x) {
        add(x);
        return *this;
    }
    CompensatedSum& operator+=(const CompensatedSum& o) {
        add(o.sum_);
        add(o.comp_);
        return *this;
    }
    Real value() const { return sum_ + comp_; }

private:
    Real sum_{0};
    Real comp_{0};
};

/// Reduce to [0,1). Integers (and values that round up to 1) map to +0.0.
inline double wrap01(double t) {
    double r = t - std::floor(t);
    if (r >= 1.0 || r == 0.0) return 0.0;
    return r;
}

/// Distance to the nearest integer.
inline double torus_distance(double t) {
    double r = wrap01(t);
    return std::min(r, 1.0 - r);
}

/// Signed representative of t mod 1 in [-1/2, 1/2).
inline double centered_mod1(double t) {
    double r = wrap01(t);
    return r >= 0.5 ? r - 1.0 : r;
}

namespace detail {
// frac(p * w) for p an exactly representable integer, using an exact two-product.
inline double exact_product_mod1(double p, double w) {
    double hi = p * w;
    double lo = std::fma(p, w, -hi);
    double f = hi - std::floor(hi);
    return wrap01(f + lo);
}
}  // namespace detail

/// frac(k * w) with error of a few ulps for any 64-bit k.
inline double mul_mod1(std::uint64_t k, double w) {
    double hi = static_cast<double>(k >> 32) * 4294967296.0;
    double lo = static_cast<double>(k & 0xffffffffULL);
    return wrap01(detail::exact_product_mod1(hi, w) + detail::exact_product_mod1(lo, w));
}

/// Signed variant of mul_mod1.
inline double imul_mod1(std::int64_t k, double w) {
    if (k >= 0) return mul_mod1(static_cast<std::uint64_t>(k), w);
    return wrap01(-mul_mod1(static_cast<std::uint64_t>(-(k + 1)) + std::uint64_t{1}, w));
}

/// Pairwise sum with a block structure that depends only on the length.
inline double fixed_order_sum(std::span<const double> xs) {
    constexpr std::size_t leaf = 32;
    if (xs.size() <= leaf) {
        CompensatedSum<> s;
        for (double x : xs) s.add(x);
        return s.value();
    }
    std::size_t half = xs.size() / 2;
    return fixed_order_sum(xs.first(half)) + fixed_order_sum(xs.subspan(half));
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Mean and population standard deviation, both in fixed summation order.
inline MeanStd mean_std(std::span<const double> xs) {
    if (xs.empty()) return {};
    double n = static_cast<double>(xs.size());
    double mean = fixed_order_sum(xs) / n;
    std::vector<double> sq(xs.size());
    std::transform(xs.begin(), xs.end(), sq.begin(), [mean](double x) { return (x - mean) * (x - mean); });
    return {mean, std::sqrt(fixed_order_sum(sq) / n)};
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
    LinearFit f;
    f.points = x.size();
    if (x.size() < 2) return f;
    double n = static_cast<double>(x.size());
    double mx = fixed_order_sum(x) / n;
    double my = fixed_order_sum(y) / n;
    CompensatedSum<> sxx, sxy, syy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxx.add(dx * dx);
        sxy.add(dx * dy);
        syy.add(dy * dy);
    }
    if (sxx.value() == 0.0) return f;
    f.slope = sxy.value() / sxx.value();
    f.intercept = my - f.slope * mx;
    f.r2 = syy.value() > 0.0 ? (sxy.value() * sxy.value()) / (sxx.value() * syy.value()) : 1.0;
    return f;
}

inline double median(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    std::size_t m = xs.size() / 2;
    return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

}  // namespace gevlab
