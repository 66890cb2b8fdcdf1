#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "gevlab/averages.hpp"
#include "gevlab/potential_io.hpp"

using namespace gevlab;

namespace {

cplx direct_fejer(std::uint64_t n, double t) {
    // long double oracle, phases reduced exactly via mul_mod1
    long double re = 0, im = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
        long double ph = 2 * 3.14159265358979323846264338327950288L * static_cast<long double>(mul_mod1(k, t));
        re += std::cos(ph);
        im += std::sin(ph);
    }
    return {static_cast<double>(re / n), static_cast<double>(im / n)};
}

FourierSeries2 random_series(std::size_t half_terms, int deg, std::uint64_t seed) {
    Rng rng(seed);
    std::set<std::pair<int, int>> used;
    std::vector<Term> terms{{0, 0, rng.uniform(-1, 1)}};
    while (used.size() < half_terms) {
        int l1 = static_cast<int>(rng.index(deg + 1));
        int l2 = static_cast<int>(rng.index(2 * deg + 1)) - deg;
        if (l1 == 0 && l2 <= 0) continue;
        if (!used.insert({l1, l2}).second) continue;
        cplx c(rng.uniform(-1, 1), rng.uniform(-1, 1));
        terms.push_back({l1, l2, c});
        terms.push_back({-l1, -l2, std::conj(c)});
    }
    return FourierSeries2(terms);
}

const MultiShift pair_shift{std::sqrt(2.0) - 1, std::sqrt(3.0) - 1};

}  // namespace

TEST(Fejer, TrivialValues) {
    EXPECT_NEAR(std::abs(fejer_kernel(17, 3.0) - cplx(1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(fejer_kernel(17, -2.0) - cplx(1, 0)), 0.0, 1e-15);
    for (double t : {0.1, 0.37, 0.5, 0.999})
        EXPECT_NEAR(std::abs(fejer_kernel(1, t) - cplx(1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(fejer_kernel(2, 0.5)), 0.0, 1e-15);
    EXPECT_THROW(fejer_kernel(0, 0.1), std::invalid_argument);
}

TEST(Fejer, ClosedFormMatchesDirectSum) {
    Rng rng(11);
    for (int i = 0; i < 300; ++i) {
        std::uint64_t n = 1 + rng.index(2000);
        double t = rng.uniform(-3, 3);
        if (torus_distance(t) < 1e-6) continue;
        EXPECT_LT(std::abs(fejer_kernel(n, t) - direct_fejer(n, t)), 1e-10) << n << " " << t;
    }
    // near-integer t goes through the fallback
    for (double t : {1e-9, -3e-9, 1.0 + 1e-10})
        EXPECT_LT(std::abs(fejer_kernel(500, t) - direct_fejer(500, t)), 1e-12);
    // just above the fallback threshold
    EXPECT_LT(std::abs(fejer_kernel(1000, 2e-6) - direct_fejer(1000, 2e-6)), 1e-10);
}

TEST(Fejer, BoundExamples) {
    auto z = fejer_bound_check(5, 0.0);
    EXPECT_DOUBLE_EQ(z.value, 1.0);
    EXPECT_DOUBLE_EQ(z.bound, 1.0);
    EXPECT_TRUE(z.ok);
    auto g = fejer_bound_check(100, (std::sqrt(5.0) - 1) / 2);
    EXPECT_TRUE(g.ok);
    EXPECT_LT(g.bound, 1.0);
    auto s = fejer_bound_check(10, 0.05);
    EXPECT_DOUBLE_EQ(s.bound, 1.0);
    EXPECT_TRUE(s.ok);
}

TEST(Fejer, BoundHoldsOnRandomInputs) {
    Rng rng(2024);
    int fails = 0;
    for (int i = 0; i < 10000; ++i) {
        std::uint64_t n = 1 + rng.index(10000);
        double t = rng.uniform(-5, 5);
        fails += !fejer_bound_check(n, t).ok;
    }
    EXPECT_EQ(fails, 0);
}

TEST(Birkhoff, TrivialCases) {
    auto c = constant_potential(2.5);
    Torus2Point x{0.3, 0.7};
    EXPECT_DOUBLE_EQ(birkhoff_average(c, x, pair_shift, 100), 2.5);
    auto v = cos_sum_potential();
    EXPECT_DOUBLE_EQ(birkhoff_average(v, x, SkewShift{0.3}, 1), v.eval(x));
    EXPECT_THROW(birkhoff_average(v, x, pair_shift, 0), std::invalid_argument);
}

TEST(Birkhoff, DiagonalCosineDecays) {
    FourierSeries2 u({{1, 1, 0.5}, {-1, -1, 0.5}});
    Rng rng(4);
    for (int i = 0; i < 5; ++i) {
        Torus2Point x{rng.uniform(), rng.uniform()};
        EXPECT_LE(std::fabs(birkhoff_average(u, x, pair_shift, 10000)), 0.01);
    }
}

TEST(Birkhoff, MatchesExplicitOrbit) {
    auto v = cos_sum_potential();
    Transform T = SkewShift{(std::sqrt(5.0) - 1) / 2};
    Torus2Point x{0.12, 0.77}, y = x;
    long double s = 0;
    for (int j = 0; j < 200; ++j) {
        s += v.eval(y);
        y = step(y, T);
    }
    EXPECT_NEAR(birkhoff_average(v, x, T, 200), static_cast<double>(s / 200), 1e-11);
}

TEST(FourierBirkhoff, ConstantHasZeroGap) {
    auto r = fourier_birkhoff_identity(constant_potential(1.25), {0.4, 0.1}, pair_shift, 30);
    EXPECT_EQ(r.gap, 0.0);
    EXPECT_DOUBLE_EQ(r.spectral, 1.25);
}

TEST(FourierBirkhoff, SingleCosine) {
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        Torus2Point x{rng.uniform(), rng.uniform()};
        auto r = fourier_birkhoff_identity(cosine_potential(), x, pair_shift, 7);
        EXPECT_LE(r.gap, 1e-12);
    }
}

TEST(FourierBirkhoff, RandomHundredTermSeries) {
    auto u = random_series(50, 12, 99);
    EXPECT_EQ(u.size(), 101u);
    Rng rng(12);
    for (int i = 0; i < 10; ++i) {
        Torus2Point x{rng.uniform(), rng.uniform()};
        auto r = fourier_birkhoff_identity(u, x, pair_shift, 50);
        EXPECT_LE(r.gap, 1e-9);
    }
}

TEST(FourierBirkhoff, ThousandTermSeriesLongOrbit) {
    auto u = random_series(500, 40, 7);
    auto r = fourier_birkhoff_identity(u, {0.21, 0.83}, MultiShift{(std::sqrt(5.0) - 1) / 2, std::sqrt(2.0) - 1}, 2000);
    EXPECT_LE(r.gap, 1e-9);
}

TEST(FourierBirkhoff, RejectsSkew) {
    EXPECT_THROW(fourier_birkhoff_identity(cosine_potential(), {0, 0}, SkewShift{0.3}, 5), std::invalid_argument);
}

TEST(Deviation, ConstantIsZero) {
    std::vector<std::uint64_t> ns{10, 100, 1000};
    for (auto mode : {PhaseMode::grid, PhaseMode::lowdisc}) {
        DeviationOptions opt;
        opt.mode = mode;
        auto rows = deviation_measure_curve(constant_potential(3.0), pair_shift, ns, opt);
        ASSERT_EQ(rows.size(), 3u);
        for (const auto& r : rows) EXPECT_EQ(r.fraction, 0.0);
    }
}

TEST(Deviation, CosineUnderGoldenPair) {
    std::vector<std::uint64_t> ns{10000, 100, 1000};
    DeviationOptions opt;
    opt.rule = {0.1, 0.0};
    auto rows = deviation_measure_curve(cosine_potential(), standard_frequencies("golden-pair"), ns, opt);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].n, 100u);
    EXPECT_EQ(rows[2].n, 10000u);
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LE(rows[k].fraction, rows[k - 1].fraction);
    EXPECT_EQ(rows[2].fraction, 0.0);
    EXPECT_EQ(rows[0].mean_kind, "zero-mode");
    for (const auto& r : rows) {
        EXPECT_GE(r.fraction, 0.0);
        EXPECT_LE(r.fraction, 1.0);
        EXPECT_GE(r.samples, 1000u);
    }
}

TEST(Deviation, FiniteLeBlocksShrink) {
    FiniteLeSource src{{10.0, 0.0, cos_sum_potential(), standard_frequencies("golden")}, 20};
    std::vector<std::uint64_t> ns{50, 100, 200};
    DeviationOptions opt;
    opt.rule = {0.5, 0.25};
    auto rows = deviation_measure_curve(src, src.params.T, ns, opt);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].mean_kind, "sample-mean");
    for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LE(rows[k].fraction, rows[k - 1].fraction);
}

TEST(Deviation, ThreadCountDoesNotChangeResult) {
    std::vector<std::uint64_t> ns{20, 40};
    DeviationOptions a, b;
    a.threads = 1;
    b.threads = 4;
    a.rule = b.rule = {0.05, 0.0};
    auto ra = deviation_measure_curve(cos_sum_potential(), SkewShift{0.3819660112501051}, ns, a);
    auto rb = deviation_measure_curve(cos_sum_potential(), SkewShift{0.3819660112501051}, ns, b);
    for (std::size_t k = 0; k < ra.size(); ++k) EXPECT_EQ(ra[k].fraction, rb[k].fraction);
}

TEST(Deviation, RejectsSmallSamples) {
    std::vector<std::uint64_t> ns{10};
    DeviationOptions opt;
    opt.sample_n = 100;
    EXPECT_THROW(deviation_measure_curve(cosine_potential(), pair_shift, ns, opt), std::invalid_argument);
}
