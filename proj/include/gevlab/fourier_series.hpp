#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "numeric.hpp"

namespace gevlab {

using cplx = std::complex<double>;

struct Term {
    int l1 = 0;
    int l2 = 0;
    cplx c{};
};

/// Finite trigonometric polynomial on T^2 with Hermitian coefficients, so
/// that it evaluates to a real function.
class FourierSeries2 {
public:
    FourierSeries2() = default;

    /// Duplicates are summed. Throws if c(-l) != conj c(l) beyond `tol`
    /// (relative to max(1, |c(l)|)).
    explicit FourierSeries2(std::vector<Term> terms, double tol = 1e-12) {
        std::sort(terms.begin(), terms.end(), less);
        for (const auto& t : terms) {
            if (!terms_.empty() && terms_.back().l1 == t.l1 && terms_.back().l2 == t.l2)
                terms_.back().c += t.c;
            else
                terms_.push_back(t);
        }
        for (const auto& t : terms_) {
            cplx partner = coefficient(-t.l1, -t.l2);
            if (std::abs(partner - std::conj(t.c)) > tol * std::max(1.0, std::abs(t.c)))
                throw std::invalid_argument("coefficients are not Hermitian at (" + std::to_string(t.l1) + "," +
                                            std::to_string(t.l2) + ")");
        }
        build_half();
    }

    std::span<const Term> terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    cplx coefficient(int l1, int l2) const {
        Term key{l1, l2, {}};
        auto it = std::lower_bound(terms_.begin(), terms_.end(), key, less);
        if (it != terms_.end() && it->l1 == l1 && it->l2 == l2) return it->c;
        return {};
    }

    double zero_mode() const { return c0_; }

    /// Largest |l1| + |l2| present.
    int degree() const {
        int d = 0;
        for (const auto& t : terms_) d = std::max(d, std::abs(t.l1) + std::abs(t.l2));
        return d;
    }

    double eval(const Torus2Point& x) const {
        if (half_.size() <= 8) {
            double acc = 0.0;
            for (const auto& t : half_) {
                double ph = two_pi * wrap01(t.l1 * x.x1() + t.l2 * x.x2());
                acc += t.c.real() * std::cos(ph) - t.c.imag() * std::sin(ph);
            }
            return c0_ + 2.0 * acc;
        }
        std::vector<cplx> e1(2 * d1_ + 1), e2(2 * d2_ + 1);
        fill_table(e1, d1_, x.x1());
        fill_table(e2, d2_, x.x2());
        double acc = 0.0;
        for (const auto& t : half_) acc += (t.c * e1[t.l1 + d1_] * e2[t.l2 + d2_]).real();
        return c0_ + 2.0 * acc;
    }
    double operator()(const Torus2Point& x) const { return eval(x); }

    /// Full complex sum over every stored coefficient.
    cplx eval_complex(const Torus2Point& x) const {
        CompensatedSum<> re, im;
        for (const auto& t : terms_) {
            double ph = two_pi * wrap01(t.l1 * x.x1() + t.l2 * x.x2());
            cplx z = t.c * cplx(std::cos(ph), std::sin(ph));
            re.add(z.real());
            im.add(z.imag());
        }
        return {re.value(), im.value()};
    }

    /// Values at ((i + offset)/n, (j + offset)/n), row-major in i (the x1 index).
    /// Grids with n >= 64 use a separable two-pass sum.
    std::vector<double> eval_grid(int n, double offset = 0.0) const {
        if (n < 1) throw std::invalid_argument("eval_grid: n must be positive");
        std::vector<double> out(static_cast<std::size_t>(n) * n, c0_);
        if (n < 64) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out[i * n + j] = eval({(i + offset) / n, (j + offset) / n});
            return out;
        }
        // distinct l1 values in half_ (sorted by l1 already)
        std::vector<int> rows;
        for (const auto& t : half_)
            if (rows.empty() || rows.back() != t.l1) rows.push_back(t.l1);
        std::vector<cplx> e2(static_cast<std::size_t>(n) * (2 * d2_ + 1));
        std::vector<cplx> tab(2 * std::max(d1_, d2_) + 1);
        for (int j = 0; j < n; ++j) {
            fill_table(std::span(tab).first(2 * d2_ + 1), d2_, (j + offset) / n);
            std::copy_n(tab.begin(), 2 * d2_ + 1, e2.begin() + static_cast<std::ptrdiff_t>(j) * (2 * d2_ + 1));
        }
        // g[r][j] = sum_{l2} c(l1_r, l2) e(l2 x2_j)
        std::vector<cplx> g(rows.size() * n);
        std::size_t r = 0, k = 0;
        for (; r < rows.size(); ++r) {
            std::size_t start = k;
            while (k < half_.size() && half_[k].l1 == rows[r]) ++k;
            for (int j = 0; j < n; ++j) {
                const cplx* ej = &e2[static_cast<std::size_t>(j) * (2 * d2_ + 1)];
                cplx s{};
                for (std::size_t q = start; q < k; ++q) s += half_[q].c * ej[half_[q].l2 + d2_];
                g[r * n + j] = s;
            }
        }
        for (int i = 0; i < n; ++i) {
            fill_table(std::span(tab).first(2 * d1_ + 1), d1_, (i + offset) / n);
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t q = 0; q < rows.size(); ++q) acc += (tab[rows[q] + d1_] * g[q * n + j]).real();
                out[i * n + j] = c0_ + 2.0 * acc;
            }
        }
        return out;
    }

    /// Partial derivative of order (a1, a2), each at most 6.
    FourierSeries2 derivative(int a1, int a2) const {
        if (a1 < 0 || a2 < 0 || a1 > 6 || a2 > 6) throw std::invalid_argument("derivative: order out of range [0,6]");
        std::vector<Term> out;
        out.reserve(terms_.size());
        for (const auto& t : terms_) {
            cplx c = t.c * ipow(cplx(0.0, two_pi * t.l1), a1) * ipow(cplx(0.0, two_pi * t.l2), a2);
            if (c != cplx{}) out.push_back({t.l1, t.l2, c});
        }
        return FourierSeries2(std::move(out), 1e-9);
    }

    /// Keep |l1| + |l2| <= n_tilde.
    FourierSeries2 truncate(int n_tilde) const {
        std::vector<Term> out;
        for (const auto& t : terms_)
            if (std::abs(t.l1) + std::abs(t.l2) <= n_tilde) out.push_back(t);
        return FourierSeries2(std::move(out));
    }

    /// The discarded part v - truncate(v, n_tilde).
    FourierSeries2 tail(int n_tilde) const {
        std::vector<Term> out;
        for (const auto& t : terms_)
            if (std::abs(t.l1) + std::abs(t.l2) > n_tilde) out.push_back(t);
        return FourierSeries2(std::move(out));
    }

    /// sum |c(l)|, an upper bound for sup |v|.
    double sup_bound() const { return derivative_majorant(0, 0); }

    /// sum |c(l)| |2 pi l1|^a1 |2 pi l2|^a2, an upper bound for sup |d^a v|.
    double derivative_majorant(int a1, int a2) const {
        CompensatedSum<> s;
        for (const auto& t : terms_)
            s.add(std::abs(t.c) * std::pow(two_pi * std::abs(t.l1), a1) * std::pow(two_pi * std::abs(t.l2), a2));
        return s.value();
    }

    /// Grid maximum of |v|; a lower estimate of the sup norm.
    double sup_estimate(int grid_n = 256) const {
        double m = 0.0;
        for (double y : eval_grid(grid_n)) m = std::max(m, std::fabs(y));
        return m;
    }

private:
    static bool less(const Term& a, const Term& b) { return a.l1 != b.l1 ? a.l1 < b.l1 : a.l2 < b.l2; }

    static cplx ipow(cplx z, int n) {
        cplx r = 1.0;
        for (int k = 0; k < n; ++k) r *= z;
        return r;
    }

    static void fill_table(std::span<cplx> e, int d, double x) {
        e[d] = 1.0;
        for (int k = 1; k <= d; ++k) {
            double ph = two_pi * mul_mod1(static_cast<std::uint64_t>(k), x);
            e[d + k] = cplx(std::cos(ph), std::sin(ph));
            e[d - k] = std::conj(e[d + k]);
        }
    }

    void build_half() {
        half_.clear();
        c0_ = 0.0;
        d1_ = d2_ = 0;
        for (const auto& t : terms_) {
            if (t.l1 == 0 && t.l2 == 0) {
                c0_ = t.c.real();
                continue;
            }
            if (t.l1 > 0 || (t.l1 == 0 && t.l2 > 0)) {
                cplx sym = 0.5 * (t.c + std::conj(coefficient(-t.l1, -t.l2)));
                half_.push_back({t.l1, t.l2, sym});
                d1_ = std::max(d1_, std::abs(t.l1));
                d2_ = std::max(d2_, std::abs(t.l2));
            }
        }
    }

    std::vector<Term> terms_;
    std::vector<Term> half_;
    double c0_ = 0.0;
    int d1_ = 0;
    int d2_ = 0;
};

}  // namespace gevlab
