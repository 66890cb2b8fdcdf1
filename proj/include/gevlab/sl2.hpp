#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "numeric.hpp"

namespace gevlab {

/// 2x2 matrix [[a, b], [c, d]].
template <class Real>
struct Mat2T {
    Real a{1}, b{0}, c{0}, d{1};

    Real det() const { return a * d - b * c; }
    Real max_abs() const {
        return std::max(std::max(rmath::abs(a), rmath::abs(b)), std::max(rmath::abs(c), rmath::abs(d)));
    }
    friend Mat2T operator*(const Mat2T& x, const Mat2T& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    Mat2T scaled(Real s) const { return {a * s, b * s, c * s, d * s}; }
};

using SL2 = Mat2T<double>;

/// Largest singular value in closed form.
template <class Real>
Real spectral_norm(const Mat2T<Real>& m) {
    return (rmath::hypot(m.a + m.d, m.b - m.c) + rmath::hypot(m.a - m.d, m.b + m.c)) / 2;
}

/// Product of 2x2 matrices kept as Q * e^L * [[1, rho], [0, delta]], with Q a
/// rotation and delta stored as a sign and a log. Each factor is absorbed by
/// a Givens step, so the small singular direction and the determinant
/// survive products whose norm is far outside the floating-point range.
template <class Real>
class BasicScaledProduct {
public:
    BasicScaledProduct() = default;

    static BasicScaledProduct from_matrix(const Mat2T<Real>& m) {
        BasicScaledProduct p;
        p.left_multiply(m);
        return p;
    }

    /// this <- m * this
    BasicScaledProduct& left_multiply(const Mat2T<Real>& m) {
        const Real b11 = m.a * qc_ + m.b * qs_, b12 = -m.a * qs_ + m.b * qc_;
        const Real b21 = m.c * qc_ + m.d * qs_, b22 = -m.c * qs_ + m.d * qc_;
        const Real h = rmath::hypot(b11, b21);
        if (!(h > 0)) throw std::domain_error("scaled product: singular factor");
        const Real c = b11 / h, s = b21 / h;
        const Real t12 = c * b12 + s * b22;
        const Real t22 = (b11 * b22 - b21 * b12) / h;
        if (t22 == 0) throw std::domain_error("scaled product: singular factor");
        const Real lh = rmath::log(h);
        rho_ += (t12 / h) * delta();
        log_r11_ += lh;
        log_delta_ += rmath::log(rmath::abs(t22));
        log_delta_ += -lh;
        if (t22 < 0) delta_sign_ = -delta_sign_;
        qc_ = c;
        qs_ = s;
        return *this;
    }

    /// x * y (y acts first).
    friend BasicScaledProduct operator*(const BasicScaledProduct& x, const BasicScaledProduct& y) {
        // B = [[1, rho_x], [0, delta_x]] * Q_y
        const Real dx = x.delta();
        const Real b11 = y.qc_ + x.rho_ * y.qs_, b12 = -y.qs_ + x.rho_ * y.qc_;
        const Real b21 = dx * y.qs_, b22 = dx * y.qc_;
        const Real h = rmath::hypot(b11, b21);
        if (!(h > 0)) throw std::domain_error("scaled product: singular product");
        const Real c = b11 / h, s = b21 / h;
        const Real t12 = c * b12 + s * b22;
        const Real lh = rmath::log(h);
        BasicScaledProduct r;
        r.log_r11_ = x.log_r11_;
        r.log_r11_ += y.log_r11_;
        r.log_r11_ += lh;
        r.rho_ = y.rho_ + (t12 / h) * y.delta();
        // t22 = det(B) / h = delta_x (qc^2 + qs^2) / h, kept in log form
        r.log_delta_ = x.log_delta_;
        r.log_delta_ += y.log_delta_;
        r.log_delta_ += rmath::log(y.qc_ * y.qc_ + y.qs_ * y.qs_);
        r.log_delta_ += -2 * lh;
        r.delta_sign_ = x.delta_sign_ * y.delta_sign_;
        const Real qc = x.qc_ * c - x.qs_ * s, qs = x.qs_ * c + x.qc_ * s;
        const Real qn = rmath::hypot(qc, qs);
        r.qc_ = qc / qn;
        r.qs_ = qs / qn;
        return r;
    }

    /// Normalized matrix (largest entry magnitude 1); the product equals
    /// e^{log_scale()} * mat().
    Mat2T<Real> mat() const { return normalized().first; }
    Real log_scale() const { return normalized().second; }

    Real log_norm() const { return log_r11_.value() + rmath::log(spectral_norm(upper())); }

    Real log_abs_det() const {
        return 2 * log_r11_.value() + log_delta_.value() + rmath::log(qc_ * qc_ + qs_ * qs_);
    }
    int det_sign() const { return delta_sign_; }
    Real determinant() const { return delta_sign_ * rmath::exp(log_abs_det()); }

    /// Plain matrix; overflows once log_scale() passes ~709 in double.
    Mat2T<Real> unscaled() const {
        auto [m, ls] = normalized();
        return m.scaled(rmath::exp(ls));
    }

    Real rho() const { return rho_; }
    Real log_r11() const { return log_r11_.value(); }
    Real log_delta() const { return log_delta_.value(); }
    Real qc() const { return qc_; }
    Real qs() const { return qs_; }

    template <class Other>
    BasicScaledProduct<Other> convert() const {
        BasicScaledProduct<Other> o;
        o.qc_ = static_cast<Other>(qc_);
        o.qs_ = static_cast<Other>(qs_);
        o.rho_ = static_cast<Other>(rho_);
        o.log_r11_ = CompensatedSum<Other>(static_cast<Other>(log_r11_.value()));
        o.log_delta_ = CompensatedSum<Other>(static_cast<Other>(log_delta_.value()));
        o.delta_sign_ = delta_sign_;
        return o;
    }

private:
    template <class>
    friend class BasicScaledProduct;

    Real delta() const { return delta_sign_ * rmath::exp(log_delta_.value()); }
    Mat2T<Real> upper() const { return {Real(1), rho_, Real(0), delta()}; }

    std::pair<Mat2T<Real>, Real> normalized() const {
        const Mat2T<Real> q{qc_, -qs_, qs_, qc_};
        Mat2T<Real> m = q * upper();
        Real mx = m.max_abs();
        return {m.scaled(1 / mx), log_r11_.value() + rmath::log(mx)};
    }

    Real qc_{1};
    Real qs_{0};
    Real rho_{0};
    CompensatedSum<Real> log_r11_{};
    CompensatedSum<Real> log_delta_{};
    int delta_sign_ = 1;
};

using ScaledProduct = BasicScaledProduct<double>;
using QuadProduct = BasicScaledProduct<quad>;

}  // namespace gevlab
