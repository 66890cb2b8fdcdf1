#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "numeric.hpp"

namespace gevlab {

/// Point of the 2-torus, both coordinates kept in [0,1).
class Torus2Point {
public:
    Torus2Point() = default;
    Torus2Point(double x1, double x2) : x1_(wrap01(x1)), x2_(wrap01(x2)) {}

    double x1() const { return x1_; }
    double x2() const { return x2_; }

    friend bool operator==(const Torus2Point&, const Torus2Point&) = default;

private:
    double x1_ = 0.0;
    double x2_ = 0.0;
};

/// (x1, x2) -> (x1 + x2, x2 + omega)
struct SkewShift {
    double omega = 0.0;
};

/// (x1, x2) -> (x1 + omega1, x2 + omega2)
struct MultiShift {
    double omega1 = 0.0;
    double omega2 = 0.0;
};

using Transform = std::variant<SkewShift, MultiShift>;

inline bool is_skew(const Transform& t) { return std::holds_alternative<SkewShift>(t); }

inline std::string transform_name(const Transform& t) {
    return is_skew(t) ? "skew" : "multi";
}

/// n-th iterate in closed form. Products n*x2 and n(n-1)/2*omega are reduced
/// mod 1 with an exact two-product split, so accuracy does not degrade with n
/// as long as n(n-1)/2 fits in 64 bits.
inline Torus2Point iterate(const Torus2Point& x, const Transform& t, std::uint64_t n) {
    if (const auto* s = std::get_if<SkewShift>(&t)) {
        if (n > 6'000'000'000ULL) throw std::out_of_range("iterate: n too large for exact binomial");
        std::uint64_t pairs = n == 0 ? 0 : (n % 2 == 0 ? (n / 2) * (n - 1) : n * ((n - 1) / 2));
        double y1 = x.x1() + mul_mod1(n, x.x2()) + mul_mod1(pairs, s->omega);
        double y2 = x.x2() + mul_mod1(n, s->omega);
        return {y1, y2};
    }
    const auto& m = std::get<MultiShift>(t);
    return {x.x1() + mul_mod1(n, m.omega1), x.x2() + mul_mod1(n, m.omega2)};
}

inline Torus2Point step(const Torus2Point& x, const Transform& t) {
    if (const auto* s = std::get_if<SkewShift>(&t)) return {x.x1() + x.x2(), x.x2() + s->omega};
    const auto& m = std::get<MultiShift>(t);
    return {x.x1() + m.omega1, x.x2() + m.omega2};
}

struct DiophantineParams {
    double kappa = 0.0;
    double A = 3.0;
    std::int64_t l_max = 1;
};

struct DiophantineRow {
    std::int64_t l1 = 0;
    std::int64_t l2 = 0;
    double value = 0.0;
    double bound = 0.0;
    double margin = 0.0;
};

/// Finite-range check; `holds` means verified up to l_max only.
struct DiophantineReport {
    bool holds = true;
    std::int64_t worst_l1 = 0;
    std::int64_t worst_l2 = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::int64_t l_max = 0;
    std::vector<DiophantineRow> rows;
};

inline DiophantineReport check_diophantine(const Transform& t, const DiophantineParams& p) {
    if (!(p.kappa > 0.0)) throw std::invalid_argument("diophantine: kappa must be positive");
    if (p.l_max < 1) throw std::invalid_argument("diophantine: l_max must be >= 1");
    DiophantineReport rep;
    rep.l_max = p.l_max;
    auto record = [&rep](DiophantineRow r) {
        if (r.margin <= 0.0) rep.holds = false;
        if (r.margin < rep.worst_margin) {
            rep.worst_margin = r.margin;
            rep.worst_l1 = r.l1;
            rep.worst_l2 = r.l2;
        }
        rep.rows.push_back(r);
    };
    if (const auto* s = std::get_if<SkewShift>(&t)) {
        // ||-l w|| = ||l w||, so positive l suffice
        for (std::int64_t l = 1; l <= p.l_max; ++l) {
            double value = torus_distance(mul_mod1(static_cast<std::uint64_t>(l), s->omega));
            double lg = std::log1p(static_cast<double>(l));
            double bound = p.kappa / (static_cast<double>(l) * lg * lg);
            record({l, 0, value, bound, value - bound});
        }
        return rep;
    }
    if (!(p.A > 2.0)) throw std::invalid_argument("diophantine: A must exceed 2");
    const auto& m = std::get<MultiShift>(t);
    // half-plane: l1 > 0, or l1 == 0 and l2 > 0; |l| is the l1-norm
    for (std::int64_t l1 = 0; l1 <= p.l_max; ++l1) {
        std::int64_t rest = p.l_max - l1;
        for (std::int64_t l2 = (l1 == 0 ? 1 : -rest); l2 <= rest; ++l2) {
            double value = torus_distance(imul_mod1(l1, m.omega1) + imul_mod1(l2, m.omega2));
            double norm = static_cast<double>(l1 + (l2 < 0 ? -l2 : l2));
            double bound = p.kappa / std::pow(norm, p.A);
            record({l1, l2, value, bound, value - bound});
        }
    }
    return rep;
}

/// Named frequencies: golden, sqrt2 (skew); pair, golden-pair (multi).
/// Also accepts "skew:<w>" and "multi:<w1>,<w2>".
inline Transform standard_frequencies(const std::string& name) {
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    const double sqrt2 = std::sqrt(2.0) - 1.0;
    const double sqrt3 = std::sqrt(3.0) - 1.0;
    if (name == "golden") return SkewShift{golden};
    if (name == "sqrt2") return SkewShift{sqrt2};
    if (name == "pair") return MultiShift{sqrt2, sqrt3};
    if (name == "golden-pair") return MultiShift{golden, sqrt2};
    try {
        if (name.rfind("skew:", 0) == 0) return SkewShift{std::stod(name.substr(5))};
        if (name.rfind("multi:", 0) == 0) {
            auto rest = name.substr(6);
            auto comma = rest.find(',');
            if (comma == std::string::npos) throw std::invalid_argument(name);
            return MultiShift{std::stod(rest.substr(0, comma)), std::stod(rest.substr(comma + 1))};
        }
    } catch (const std::logic_error&) {
    }
    throw std::invalid_argument("unknown frequency: " + name);
}

}  // namespace gevlab
