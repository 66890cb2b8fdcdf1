#include <cmath>

#include <gtest/gtest.h>

#include "gevlab/potential_io.hpp"
#include "gevlab/spectral.hpp"

using namespace gevlab;

namespace {

CocycleParams params(double lambda, double E, FourierSeries2 v, const char* freq) {
    return {lambda, E, std::move(v), standard_frequencies(freq)};
}

// Dense Gaussian elimination with partial pivoting in long double.
long double dense_det(std::vector<std::vector<long double>> a) {
    const std::size_t n = a.size();
    long double det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        if (a[piv][c] == 0) return 0;
        if (piv != c) {
            std::swap(a[piv], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            long double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    return det;
}

long double dense_box_det(const BoxHamiltonian& h, long lo, long hi, double E) {
    long n = hi - lo + 1;
    if (n == 0) return 1;
    if (n == -1) return 0;
    std::vector<std::vector<long double>> a(n, std::vector<long double>(n, 0));
    for (long i = 0; i < n; ++i) {
        a[i][i] = h.diag[lo - 1 + i] - static_cast<long double>(E);
        if (i + 1 < n) a[i][i + 1] = a[i + 1][i] = -1;
    }
    return dense_det(a);
}

}  // namespace

TEST(Box, Construction) {
    auto p = params(3.0, 0.0, constant_potential(1.0), "golden");
    auto h = build_box({0.1, 0.2}, p, 5);
    ASSERT_EQ(h.size(), 5u);
    for (double d : h.diag) EXPECT_DOUBLE_EQ(d, 3.0);
    auto q = params(2.0, 0.0, cos_sum_potential(), "golden");
    Torus2Point x{0.3, 0.6};
    auto h1 = build_box(x, q, 1);
    ASSERT_EQ(h1.size(), 1u);
    EXPECT_DOUBLE_EQ(h1.diag[0], 2.0 * q.v.eval(step(x, q.T)));
    EXPECT_THROW(build_box(x, q, 0), std::invalid_argument);
}

TEST(Eigen, FreeLaplacianClosedForm) {
    auto p = params(0.0, 0.0, cos_sum_potential(), "golden");
    for (long N : {1L, 2L, 7L, 64L, 200L}) {
        auto eig = box_eigen(build_box({0, 0}, p, N), false);
        for (long k = 1; k <= N; ++k)
            EXPECT_NEAR(eig.values[k - 1], -2 * std::cos(M_PI * k / (N + 1)), 1e-10) << N << " " << k;
    }
}

TEST(Eigen, ResidualAndOrthogonality) {
    auto p = params(7.0, 0.0, cos_sum_potential(), "golden");
    auto h = build_box({0.17, 0.71}, p, 120);
    auto eig = box_eigen(h, true);
    const std::size_t n = h.size();
    double trace = 0, sum = 0;
    for (std::size_t i = 0; i < n; ++i) trace += h.diag[i];
    for (std::size_t k = 0; k < n; ++k) {
        sum += eig.values[k];
        if (k > 0) {
            EXPECT_LE(eig.values[k - 1], eig.values[k]);
        }
        const auto& v = eig.vectors[k];
        double res = 0, nrm = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double hv = h.diag[i] * v[i] + (i > 0 ? -v[i - 1] : 0.0) + (i + 1 < n ? -v[i + 1] : 0.0);
            res = std::max(res, std::fabs(hv - eig.values[k] * v[i]));
            nrm += v[i] * v[i];
        }
        EXPECT_LE(res, 1e-10);
        EXPECT_NEAR(nrm, 1.0, 1e-12);
    }
    EXPECT_NEAR(sum, trace, 1e-9);
    for (std::size_t a = 0; a < n; a += 17)
        for (std::size_t b = a + 1; b < n; b += 13) {
            double dot = 0;
            for (std::size_t i = 0; i < n; ++i) dot += eig.vectors[a][i] * eig.vectors[b][i];
            EXPECT_NEAR(dot, 0.0, 1e-10);
        }
}

TEST(Eigen, InsideSpectrumInterval) {
    Rng rng(77);
    for (int t = 0; t < 100; ++t) {
        double lambda = rng.uniform(-20, 20);
        auto v = t % 2 ? cos_sum_potential() : gevrey_series({2, 1, 0.3}, 6, static_cast<std::uint64_t>(t));
        CocycleParams p{lambda, 0.0, v, t % 3 ? standard_frequencies("golden") : standard_frequencies("pair")};
        auto eig = box_eigen(build_box({rng.uniform(), rng.uniform()}, p, 40), false);
        auto [lo, hi] = spectrum_interval(lambda, potential_bound(v));
        EXPECT_GE(eig.values.front(), lo);
        EXPECT_LE(eig.values.back(), hi);
    }
}

TEST(Determinant, PivotedLUMatchesDense) {
    auto p = params(5.0, 0.7, cos_sum_potential(), "golden");
    auto h = build_box({0.4, 0.9}, p, 30);
    for (auto [lo, hi] : {std::pair{1L, 30L}, std::pair{2L, 30L}, std::pair{1L, 29L}, std::pair{5L, 12L}, std::pair{3L, 3L}}) {
        auto ld = box_log_det(h, lo, hi, p.E);
        long double ref = dense_box_det(h, lo, hi, p.E);
        EXPECT_NEAR(ld.value(), static_cast<double>(ref), 1e-11 * std::fabs(static_cast<double>(ref)));
    }
    EXPECT_EQ(box_log_det(h, 4, 3, p.E).value(), 1.0);
    EXPECT_EQ(box_log_det(h, 4, 2, p.E).value(), 0.0);
}

TEST(Determinant, TransferIdentityN1) {
    auto p = params(2.0, 0.3, cos_sum_potential(), "golden");
    Torus2Point x{0.25, 0.5};
    auto r = det_transfer_identity(x, p, 1);
    EXPECT_LE(r.max_gap, 1e-15);
    auto h = build_box(x, p, 1);
    EXPECT_NEAR(r.det_values[0] * std::exp(r.log_scale), h.diag[0] - p.E, 1e-14);
}

TEST(Determinant, FreeBoxChebyshev) {
    auto p = params(0.0, 0.0, cos_sum_potential(), "golden");
    auto r = det_transfer_identity({0.1, 0.1}, p, 4);
    EXPECT_LE(r.max_gap, 1e-14);
    // det of the free box at E=0 is 1, 0, -1, 0, 1 for N = 0..4
    auto s = std::exp(r.log_scale);
    EXPECT_NEAR(r.m_entries[0] * s, 1.0, 1e-14);
    EXPECT_NEAR(r.m_entries[1] * s, 0.0, 1e-14);
    EXPECT_NEAR(r.m_entries[2] * s, 0.0, 1e-14);
    EXPECT_NEAR(r.m_entries[3] * s, 1.0, 1e-14);  // -det H_2
}

TEST(Determinant, TransferIdentityModerateCoupling) {
    auto p = params(5.0, 0.7, cos_sum_potential(), "golden");
    EXPECT_LE(det_transfer_identity({0.13, 0.58}, p, 12).max_gap, 1e-9);
    Rng rng(9);
    for (int t = 0; t < 40; ++t) {
        CocycleParams q{rng.uniform(-10, 10), rng.uniform(-12, 12), cos_sum_potential(), t % 2 ? standard_frequencies("golden") : standard_frequencies("pair")};
        long N = 2 + static_cast<long>(rng.index(59));
        auto r = det_transfer_identity({rng.uniform(), rng.uniform()}, q, N);
        EXPECT_LE(r.max_gap, 1e-8) << N;
        EXPECT_FALSE(r.overflow);
    }
}

TEST(Determinant, DenseOracleForEntries) {
    auto p = params(3.0, -0.4, cos_sum_potential(), "pair");
    Torus2Point x{0.61, 0.07};
    long N = 20;
    auto r = det_transfer_identity(x, p, N);
    auto h = build_box(x, p, N);
    double s = std::exp(r.log_scale);
    EXPECT_NEAR(r.m_entries[0] * s, static_cast<double>(dense_box_det(h, 1, N, p.E)), 1e-8 * s);
    EXPECT_NEAR(r.m_entries[1] * s, -static_cast<double>(dense_box_det(h, 2, N, p.E)), 1e-8 * s);
    EXPECT_NEAR(r.m_entries[2] * s, static_cast<double>(dense_box_det(h, 1, N - 1, p.E)), 1e-8 * s);
    EXPECT_NEAR(r.m_entries[3] * s, -static_cast<double>(dense_box_det(h, 2, N - 1, p.E)), 1e-8 * s);
}

TEST(Determinant, OverflowFlag) {
    auto p = params(1e6, 0.0, constant_potential(1.0), "golden");
    auto r = det_transfer_identity({0, 0}, p, 60);
    EXPECT_TRUE(r.overflow);
    EXPECT_LE(r.max_gap, 1e-8);
}

TEST(Green, OneSite) {
    auto p = params(2.0, 0.1, cos_sum_potential(), "golden");
    Torus2Point x{0.3, 0.3};
    auto g = green_function(x, p, 1, 3);
    EXPECT_NEAR(g.at(1, 1), 1.0 / (2.0 * p.v.eval(step(x, p.T)) - 0.1), 1e-14);
    EXPECT_TRUE(g.cramer_ok);
}

TEST(Green, FreeThreeSiteInverse) {
    // H - E = [[-E,-1,0],[-1,-E,-1],[0,-1,-E]] at E = 0.5, inverse by adjugate
    auto p = params(0.0, 0.5, cos_sum_potential(), "golden");
    auto g = green_function({0, 0}, p, 3);
    double e = 0.5;
    double det = -e * e * e + 2 * e;
    double adj[3][3] = {{e * e - 1, -e, 1}, {-e, e * e, -e}, {1, -e, e * e - 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(g.at(i + 1, j + 1), adj[i][j] / det, 1e-14);
    EXPECT_LE(g.residual, 1e-14);
}

TEST(Green, NearEigenvalueRejected) {
    auto p = params(0.0, 0.0, cos_sum_potential(), "golden");
    // E = 0 is an eigenvalue of the free 3-site box
    EXPECT_THROW(green_function({0, 0}, p, 3), std::domain_error);
}

TEST(Green, ResidualAndCramerAtStrongCoupling) {
    Rng rng(31);
    int tested = 0;
    for (int t = 0; t < 10; ++t) {
        auto p = params(10.0, rng.uniform(-12, 12), cos_sum_potential(), "golden");
        try {
            auto g = green_function({rng.uniform(), rng.uniform()}, p, 40, 20, 5 + t);
            EXPECT_LE(g.residual, 1e-8);
            EXPECT_TRUE(g.cramer_ok);
            ++tested;
        } catch (const std::domain_error&) {
        }
    }
    EXPECT_GE(tested, 8);
}

TEST(Green, FourBoxes) {
    auto p = params(4.0, 0.33, cos_sum_potential(), "golden");
    auto s = four_box_green({0.2, 0.4}, p, 30);
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s[3].lo, 2);
    EXPECT_EQ(s[3].hi, 29);
    for (const auto& b : s) EXPECT_GT(b.max_abs_g, 0.0);
}

TEST(Decay, FreeBoxIsExtended) {
    auto p = params(0.0, 0.0, cos_sum_potential(), "golden");
    auto rep = eigen_decay_report({0.1, 0.2}, p, 64);
    EXPECT_LE(rep.median_gamma_mid, 0.05);
    EXPECT_LE(rep.median_r2_mid, 0.5);
}

TEST(Decay, StrongCouplingLocalizes) {
    auto p = params(50.0, 0.0, cos_sum_potential(), "golden");
    auto rep = eigen_decay_report({0.123, 0.456}, p, 256);
    EXPECT_GE(rep.median_gamma_mid, 0.7 * 0.25 * std::log(50.0));
    EXPECT_GE(rep.median_r2_mid, 0.8);
    for (const auto& s : rep.states) {
        if (s.r2 >= 0.5) {
            EXPECT_GE(s.gamma, 0.0);
        }
    }
}

TEST(Decay, HugeCouplingDecaysFast) {
    auto p = params(1000.0, 0.0, cos_sum_potential(), "golden");
    auto rep = eigen_decay_report({0.31, 0.77}, p, 128);
    std::size_t fast = 0;
    for (const auto& s : rep.states) fast += s.gamma >= 3.0;
    EXPECT_GE(static_cast<double>(fast), 0.9 * static_cast<double>(rep.states.size()));
}

TEST(Decay, FitOnSyntheticProfile) {
    std::vector<double> psi(81);
    for (int i = 0; i < 81; ++i) psi[i] = std::exp(-0.8 * std::abs(i - 40));
    auto d = fit_decay(psi, 1e-12);
    EXPECT_EQ(d.center, 40);
    EXPECT_NEAR(d.gamma, 0.8, 1e-12);
    EXPECT_NEAR(d.r2, 1.0, 1e-12);
    // tail touching the edge on both sides: no fit
    auto flat = fit_decay(std::vector<double>(20, 0.2));
    EXPECT_EQ(flat.gamma, 0.0);
    EXPECT_EQ(flat.r2, 0.0);
}
