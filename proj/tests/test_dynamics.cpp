#include <cmath>

#include <gtest/gtest.h>

#include "gevlab/dynamics.hpp"
#include "gevlab/sampling.hpp"

using namespace gevlab;

namespace {

double torus_gap(const Torus2Point& a, const Torus2Point& b) {
    return std::max(torus_distance(a.x1() - b.x1()), torus_distance(a.x2() - b.x2()));
}

// Exact frac(k * w): w = m / 2^s with integer m, so k*m fits in 128 bits.
long double exact_frac(unsigned __int128 k, double w) {
    int e = 0;
    double f = std::frexp(w, &e);  // w = f 2^e, f in [0.5, 1)
    auto m = static_cast<unsigned __int128>(std::ldexp(f, 53));
    int s = 53 - e;
    EXPECT_LT(s, 128);
    unsigned __int128 mask = (static_cast<unsigned __int128>(1) << s) - 1;
    unsigned __int128 r = (k * m) & mask;
    return std::ldexp(static_cast<long double>(r), -s);
}

// Reference iterate using exact modular products.
Torus2Point iterate_oracle(const Torus2Point& x, double omega, unsigned long long n) {
    using LD = long double;
    unsigned __int128 pairs = static_cast<unsigned __int128>(n) * (n - 1) / 2;
    LD y1 = x.x1() + exact_frac(n, x.x2()) + exact_frac(pairs, omega);
    LD y2 = x.x2() + exact_frac(n, omega);
    return {static_cast<double>(y1 - std::floor(y1)), static_cast<double>(y2 - std::floor(y2))};
}

}  // namespace

TEST(Torus, ReducesCoordinates) {
    Torus2Point p(3.0, -0.25);
    EXPECT_EQ(p.x1(), 0.0);
    EXPECT_DOUBLE_EQ(p.x2(), 0.75);
    EXPECT_FALSE(std::signbit(Torus2Point(-1.0, 0.0).x1()));
    EXPECT_EQ(Torus2Point(-1e-18, 0.0).x1(), 0.0);
}

TEST(Torus, DistanceExamples) {
    EXPECT_DOUBLE_EQ(torus_distance(0.5), 0.5);
    EXPECT_NEAR(torus_distance(0.9), 0.1, 1e-15);
    EXPECT_EQ(torus_distance(3.0), 0.0);
}

TEST(Torus, DistanceSymmetries) {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        double t = rng.uniform(-5.0, 5.0);
        EXPECT_EQ(torus_distance(t), torus_distance(-t)) << t;
        EXPECT_NEAR(torus_distance(t), torus_distance(t + 1.0), 1e-15) << t;
    }
    // exact when the shift does not lose bits
    for (double t : {0.125, 0.3125, 0.75, 0.0, 0.5}) {
        EXPECT_EQ(torus_distance(t), torus_distance(-t));
        EXPECT_EQ(torus_distance(t), torus_distance(t + 1.0));
    }
}

TEST(Iterate, SkewSingleStep) {
    auto y = iterate({0.2, 0.3}, SkewShift{0.5}, 1);
    EXPECT_NEAR(y.x1(), 0.5, 1e-15);
    EXPECT_NEAR(y.x2(), 0.8, 1e-15);
}

TEST(Iterate, ZeroStepsIsIdentity) {
    Torus2Point x(0.37, 0.81);
    EXPECT_EQ(iterate(x, SkewShift{0.3}, 0), x);
    EXPECT_EQ(iterate(x, MultiShift{0.3, 0.4}, 0), x);
}

TEST(Iterate, SevenStepsMatchComposition) {
    Transform t = standard_frequencies("sqrt2");
    Torus2Point x(0.1234, 0.5678), y = x;
    for (int k = 0; k < 7; ++k) y = step(y, t);
    EXPECT_LT(torus_gap(iterate(x, t, 7), y), 1e-12);
}

TEST(Iterate, ClosedFormMatchesCompositionUpTo1e4) {
    Rng rng(11);
    for (const char* name : {"golden", "sqrt2", "pair"}) {
        Transform t = standard_frequencies(name);
        for (int trial = 0; trial < 5; ++trial) {
            Torus2Point x = rng.point(), y = x;
            double worst = 0.0;
            for (std::uint64_t n = 1; n <= 10000; ++n) {
                y = step(y, t);
                if (n % 97 == 0 || n == 10000) worst = std::max(worst, torus_gap(iterate(x, t, n), y));
            }
            EXPECT_LT(worst, 1e-10) << name;
        }
    }
}

TEST(Iterate, LargeNAgainstIntegerOracle) {
    const double w = (std::sqrt(5.0) - 1.0) / 2.0;
    Torus2Point x(0.3, 0.6);
    for (unsigned long long n : {1000ULL, 123456ULL, 1000000ULL, 99999999ULL, 1000000000ULL}) {
        auto a = iterate(x, SkewShift{w}, n);
        auto b = iterate_oracle(x, w, n);
        EXPECT_LT(torus_gap(a, b), 1e-13) << n;
    }
}

TEST(Iterate, GroupProperty) {
    Rng rng(3);
    for (const char* name : {"golden", "pair"}) {
        Transform t = standard_frequencies(name);
        for (int i = 0; i < 200; ++i) {
            Torus2Point x = rng.point();
            std::uint64_t m = rng.index(5000), n = rng.index(5000);
            EXPECT_LT(torus_gap(iterate(x, t, m + n), iterate(iterate(x, t, m), t, n)), 1e-12);
        }
    }
}

TEST(MulMod1, NegativeMultipliers) {
    EXPECT_NEAR(imul_mod1(std::int64_t{-3}, 0.25), 0.25, 1e-16);
    EXPECT_EQ(imul_mod1(std::int64_t{-4}, 0.25), 0.0);
    EXPECT_NEAR(imul_mod1(std::int64_t{-1}, 0.1), 0.9, 1e-16);
}

TEST(Diophantine, RationalFailsAtThree) {
    auto r = check_diophantine(SkewShift{1.0 / 3.0}, {0.1, 3.0, 10});
    EXPECT_FALSE(r.holds);
    EXPECT_EQ(r.worst_l1, 3);
    EXPECT_LT(r.worst_margin, 0.0);
    EXPECT_EQ(r.rows.size(), 10u);
}

TEST(Diophantine, GoldenHolds) {
    auto r = check_diophantine(standard_frequencies("golden"), {0.05, 3.0, 10000});
    EXPECT_TRUE(r.holds);
    EXPECT_GT(r.worst_margin, 0.0);
    EXPECT_EQ(r.l_max, 10000);
}

TEST(Diophantine, PairHolds) {
    auto r = check_diophantine(standard_frequencies("pair"), {0.01, 3.0, 200});
    EXPECT_TRUE(r.holds);
    // half-plane count of 0 < |l1|+|l2| <= 200
    EXPECT_EQ(r.rows.size(), static_cast<std::size_t>(200 * 201));
}

TEST(Diophantine, RejectsBadParams) {
    EXPECT_THROW(check_diophantine(SkewShift{0.3}, {0.0, 3.0, 5}), std::invalid_argument);
    EXPECT_THROW(check_diophantine(MultiShift{0.3, 0.2}, {0.1, 2.0, 5}), std::invalid_argument);
    EXPECT_THROW(check_diophantine(SkewShift{0.3}, {0.1, 3.0, 0}), std::invalid_argument);
}

TEST(Frequencies, Named) {
    EXPECT_TRUE(is_skew(standard_frequencies("golden")));
    EXPECT_NEAR(std::get<SkewShift>(standard_frequencies("golden")).omega, 0.6180339887498949, 1e-15);
    auto pair = std::get<MultiShift>(standard_frequencies("pair"));
    EXPECT_NEAR(pair.omega1, 0.41421356237309515, 1e-15);
    EXPECT_NEAR(pair.omega2, 0.7320508075688772, 1e-15);
    EXPECT_NEAR(std::get<SkewShift>(standard_frequencies("skew:0.25")).omega, 0.25, 0);
    EXPECT_THROW(standard_frequencies("nope"), std::invalid_argument);
}

TEST(Phases, GridAndLowDiscrepancy) {
    auto g = grid_phases(4);
    ASSERT_EQ(g.size(), 16u);
    EXPECT_DOUBLE_EQ(g[0].x1(), 0.125);
    auto a = lowdisc_phases(100, 5), b = lowdisc_phases(100, 5), c = lowdisc_phases(100, 6);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    // star-discrepancy proxy: every quarter box holds close to a quarter of the points
    auto big = lowdisc_phases(4096, 1);
    int q = 0;
    for (const auto& p : big) q += (p.x1() < 0.5 && p.x2() < 0.5);
    EXPECT_NEAR(q / 4096.0, 0.25, 0.01);
}
