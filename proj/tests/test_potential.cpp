#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "gevlab/gevrey.hpp"
#include "gevlab/potential_io.hpp"
#include "gevlab/sampling.hpp"
#include "gevlab/transversality.hpp"

using namespace gevlab;

namespace {

constexpr double pi = std::numbers::pi;

FourierSeries2 random_series(int count, int max_l, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Term> terms;
    for (int k = 0; k < count; ++k) {
        int l1 = static_cast<int>(rng.index(2 * max_l + 1)) - max_l;
        int l2 = static_cast<int>(rng.index(2 * max_l + 1)) - max_l;
        cplx c(rng.uniform(-1, 1), rng.uniform(-1, 1));
        if (l1 == 0 && l2 == 0) c = c.real();
        terms.push_back({l1, l2, c});
        if (l1 != 0 || l2 != 0) terms.push_back({-l1, -l2, std::conj(c)});
    }
    return FourierSeries2(terms);
}

// Quad-precision evaluation of the full complex sum.
double eval_quad(const FourierSeries2& v, const Torus2Point& x) {
    quad re = 0;
    const quad tp = 2 * M_PIq;
    for (const auto& t : v.terms()) {
        quad ph = tp * (static_cast<quad>(t.l1) * static_cast<quad>(x.x1()) + static_cast<quad>(t.l2) * static_cast<quad>(x.x2()));
        re += static_cast<quad>(t.c.real()) * cosq(ph) - static_cast<quad>(t.c.imag()) * sinq(ph);
    }
    return static_cast<double>(re);
}

FourierSeries2 gevrey_test_series(std::uint64_t seed) {
    return gevrey_series({2.0, 2.0, 1.0}, 60, seed);
}

}  // namespace

TEST(Series, RejectsNonHermitian) {
    EXPECT_THROW(FourierSeries2({{1, 0, cplx(0.5, 0.1)}, {-1, 0, cplx(0.5, 0.1)}}), std::invalid_argument);
    EXPECT_THROW(FourierSeries2({{1, 2, 1.0}}), std::invalid_argument);
    EXPECT_NO_THROW(FourierSeries2({{1, 0, cplx(0.5, 0.1)}, {-1, 0, cplx(0.5, -0.1)}}));
}

TEST(Series, MergesDuplicates) {
    FourierSeries2 v({{1, 0, 0.25}, {1, 0, 0.25}, {-1, 0, 0.5}});
    EXPECT_EQ(v.size(), 2u);
    EXPECT_DOUBLE_EQ(v.coefficient(1, 0).real(), 0.5);
}

TEST(Series, CosineExamples) {
    EXPECT_NEAR(cosine_potential().eval({0.0, 0.37}), 1.0, 1e-15);
    EXPECT_NEAR(cos_sum_potential().eval({0.25, 0.25}), 0.0, 1e-15);
    EXPECT_NEAR(cos_sum_potential().eval({0.0, 0.0}), 2.0, 1e-15);
}

TEST(Series, RandomSeriesMatchesQuadOracle) {
    auto v = random_series(50, 12, 42);
    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        auto x = rng.point();
        EXPECT_NEAR(v.eval(x), eval_quad(v, x), 1e-12);
        auto z = v.eval_complex(x);
        EXPECT_NEAR(z.real(), eval_quad(v, x), 1e-12);
        EXPECT_LE(std::fabs(z.imag()), 1e-12);
    }
}

TEST(Series, GridMatchesPointwise) {
    for (const auto& v : {random_series(30, 6, 9), gevrey_test_series(3), cos_sum_potential()}) {
        for (int n : {64, 96}) {
            auto g = v.eval_grid(n, 0.25);
            double worst = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) worst = std::max(worst, std::fabs(g[i * n + j] - v.eval({(i + 0.25) / n, (j + 0.25) / n})));
            EXPECT_LT(worst, 1e-12);
        }
    }
}

TEST(Derivative, CosineFirstDerivative) {
    auto d = cosine_potential().derivative(1, 0);
    EXPECT_NEAR(d.eval({0.25, 0.0}), -2.0 * pi, 1e-13);
}

TEST(Derivative, CosSumSecondDerivativeAgainstFiniteDifference) {
    auto v = cos_sum_potential();
    const double h = 1e-5;
    auto f = [&](double t) { return v.eval({t, 0.0}); };
    double fd = (f(h) - 2 * f(0) + f(-h)) / (h * h);
    double exact = v.derivative(2, 0).eval({0.0, 0.0});
    EXPECT_NEAR(exact, -4 * pi * pi, 1e-10);
    EXPECT_NEAR(fd / exact, 1.0, 1e-3);
}

TEST(Derivative, MixedPartialsAgainstFiniteDifference) {
    auto v = random_series(20, 4, 5);
    Rng rng(8);
    const double h = 1e-4;
    for (int i = 0; i < 20; ++i) {
        auto x = rng.point();
        auto f = [&](double a, double b) { return v.eval({x.x1() + a, x.x2() + b}); };
        double fd = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
        double exact = v.derivative(1, 1).eval(x);
        EXPECT_NEAR(fd, exact, 1e-4 * std::max(1.0, std::fabs(exact)));
    }
}

TEST(Derivative, OrderLimit) {
    EXPECT_THROW(cosine_potential().derivative(7, 0), std::invalid_argument);
    EXPECT_THROW(cosine_potential().derivative(-1, 0), std::invalid_argument);
    EXPECT_NO_THROW(cosine_potential().derivative(6, 6));
}

TEST(Derivative, MajorantBoundsGrid) {
    auto v = random_series(25, 5, 77);
    for (auto [a, b] : {std::pair{0, 0}, {1, 0}, {0, 2}, {2, 1}}) {
        double m = v.derivative_majorant(a, b);
        for (double y : v.derivative(a, b).eval_grid(64)) EXPECT_LE(std::fabs(y), m * (1 + 1e-12));
    }
}

TEST(Truncate, KeepsLowModes) {
    auto v = gevrey_test_series(1);
    auto t = v.truncate(5);
    EXPECT_EQ(t.degree(), 5);
    EXPECT_EQ(t.size(), lattice_ball_size(5) - 1);  // no zero mode
    EXPECT_EQ(v.coefficient(3, -2), t.coefficient(3, -2));
}

TEST(Truncate, Idempotent) {
    auto v = random_series(80, 10, 3);
    for (auto [a, b] : {std::pair{3, 7}, {7, 3}, {5, 5}, {0, 9}}) {
        auto lhs = v.truncate(a).truncate(b);
        auto rhs = v.truncate(std::min(a, b));
        ASSERT_EQ(lhs.size(), rhs.size());
        for (std::size_t k = 0; k < lhs.size(); ++k) {
            EXPECT_EQ(lhs.terms()[k].l1, rhs.terms()[k].l1);
            EXPECT_EQ(lhs.terms()[k].c, rhs.terms()[k].c);
        }
    }
}

TEST(Truncate, TailPlusHeadIsWhole) {
    auto v = gevrey_test_series(4);
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
        auto x = rng.point();
        EXPECT_NEAR(v.truncate(10).eval(x) + v.tail(10).eval(x), v.eval(x), 1e-13);
    }
}

TEST(Gevrey, ParameterChecks) {
    EXPECT_TRUE(check_gevrey({2.0, 1.0, 1.0}).valid);
    EXPECT_FALSE(check_gevrey({2.0, 1.0, 1.0}).analytic_warning);
    EXPECT_TRUE(check_gevrey({1.0, 1.0, 1.0}).analytic_warning);
    EXPECT_FALSE(check_gevrey({0.9, 1.0, 1.0}).valid);
    EXPECT_FALSE(check_gevrey({2.0, 0.0, 1.0}).valid);
    EXPECT_FALSE(check_gevrey({2.0, 1.0, -1.0}).valid);
}

TEST(Gevrey, TruncationPlan) {
    auto p = plan_truncation({2.0, 1.0, 1.0}, 2);
    EXPECT_EQ(p.N_tilde, 16);
    EXPECT_FALSE(p.capped);
    EXPECT_DOUBLE_EQ(p.delta, 2.0);
    EXPECT_DOUBLE_EQ(p.rho1, 0.5 * std::pow(2.0, -2.0));
    auto q = plan_truncation({2.0, 1.0, 1.0}, 10);
    EXPECT_TRUE(q.capped);
    EXPECT_EQ(q.N_tilde, q.cap_degree);
    EXPECT_LE(lattice_ball_size(q.cap_degree), 10000u);
    EXPECT_GT(lattice_ball_size(q.cap_degree + 1), 10000u);
}

TEST(Gevrey, TailUnderflowsForAnalyticLikeDecay) {
    auto t = gevrey_tail_bound({1.0001, 10.0, 1.0}, 100);
    EXPECT_EQ(t.value, 0.0);
    EXPECT_TRUE(t.underflow);
}

TEST(Gevrey, TailMatchesDirectSum) {
    long double direct = 0;
    for (long k = 26; k <= 1'000'000; ++k) direct += 4.0L * k * std::exp(-2.0L * std::sqrt(static_cast<long double>(k)));
    auto t = gevrey_tail_bound({2.0, 2.0, 1.0}, 25);
    EXPECT_FALSE(t.underflow);
    EXPECT_NEAR(t.value / static_cast<double>(direct), 1.0, 1e-12);
}

TEST(Gevrey, TailMonotone) {
    GevreyParams p{2.0, 1.5, 2.0};
    double prev = gevrey_tail_bound(p, 0).value;
    for (long n = 1; n < 200; n += 7) {
        double cur = gevrey_tail_bound(p, n).value;
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(Gevrey, TailBoundIsSoundOnGrids) {
    GevreyParams p{2.0, 2.0, 1.0};
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto v = gevrey_series(p, 60, seed);
        auto tail = v.tail(20);
        double bound = gevrey_tail_bound(p, 20).value;
        for (int n : {64, 256}) {
            double sup = 0.0;
            for (double y : tail.eval_grid(n)) sup = std::max(sup, std::fabs(y));
            EXPECT_LE(sup, bound);
        }
    }
}

TEST(Gevrey, CoefficientsRespectDecay) {
    GevreyParams p{2.0, 1.0, 1.0};
    auto v = gevrey_series(p, 20, 9);
    for (const auto& t : v.terms()) {
        double k = std::abs(t.l1) + std::abs(t.l2);
        EXPECT_LE(std::abs(t.c), p.M * std::exp(-p.rho * std::sqrt(k)) * (1 + 1e-14));
    }
}

TEST(Transversality, ConstantFails) {
    EXPECT_THROW(transversality_certificate(constant_potential(1.0), {2, 2}, 64), std::runtime_error);
}

TEST(Transversality, CosineNeedsSecondDerivativeInX1) {
    const int n = 128;
    auto r = transversality_certificate(cosine_potential(), {2, 2}, n);
    EXPECT_EQ(r.m, (MultiIndex{2, 0}));
    double oracle = 1e300;
    for (int i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / n;
        oracle = std::min(oracle, std::max(2 * pi * std::fabs(std::sin(2 * pi * t)), 4 * pi * pi * std::fabs(std::cos(2 * pi * t))));
    }
    EXPECT_NEAR(r.c, oracle, 1e-10);
    EXPECT_TRUE(r.certified);
    EXPECT_DOUBLE_EQ(r.spacing, 1.0 / n);
}

TEST(Transversality, CosSumPicksLowestOrder) {
    const int n = 128;
    auto r = transversality_certificate(cos_sum_potential(), {2, 2}, n);
    EXPECT_EQ(r.m, (MultiIndex{0, 2}));
    // the continuum minimum of max(2 pi |sin|, 4 pi^2 |cos|) sits where tan = 2 pi
    double cont = 2 * pi * (2 * pi) / std::sqrt(1 + 4 * pi * pi);
    EXPECT_GE(r.c, cont - 1e-12);
    EXPECT_LE(r.c - cont, r.lipschitz_slack);
}

TEST(Transversality, CosSumFullIndexLevel) {
    // at m = (2,2) every first and second pure derivative competes; the level is
    // governed by points where both cosines vanish, where only 2 pi |sin| remains
    auto lv = transversality_level(cos_sum_potential(), {2, 2}, 128);
    EXPECT_NEAR(lv.c, 2 * pi * (2 * pi) / std::sqrt(1 + 4 * pi * pi), lv.lipschitz_slack);
}

TEST(PotentialIO, RoundTrip) {
    auto v = random_series(10, 3, 4);
    std::stringstream ss;
    write_series(ss, v);
    auto w = read_series(ss);
    ASSERT_EQ(w.size(), v.size());
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_EQ(v.terms()[k].c, w.terms()[k].c);
}

TEST(PotentialIO, HalfSpecIsCompleted) {
    std::stringstream ss("# cos(2 pi x1)\n1 0 0.5 0\n");
    auto v = read_series(ss);
    EXPECT_EQ(v.size(), 2u);
    EXPECT_NEAR(v.eval({0.0, 0.2}), 1.0, 1e-15);
}

TEST(PotentialIO, Presets) {
    EXPECT_EQ(parse_potential("cosine").size(), 2u);
    EXPECT_EQ(parse_potential("cos-sum").size(), 4u);
    EXPECT_NEAR(parse_potential("constant:1.5").eval({0.3, 0.3}), 1.5, 0);
    auto g = parse_potential("gevrey:s=2,rho=1");
    EXPECT_EQ(g.degree(), 24);
    EXPECT_NEAR(std::abs(g.coefficient(1, 0)), std::exp(-1.0), 1e-15);
    EXPECT_THROW(parse_potential("gevrey:s=2,rho=1,deg=200"), std::invalid_argument);
    EXPECT_THROW(parse_potential("gevrey:q=2"), std::invalid_argument);
    EXPECT_THROW(parse_potential("does-not-exist"), std::invalid_argument);
}
