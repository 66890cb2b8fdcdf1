#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "averages.hpp"
#include "cocycle.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "executor.hpp"
#include "lojasiewicz.hpp"
#include "spectral.hpp"
#include "transversality.hpp"

#ifndef GEVLAB_VERSION
#define GEVLAB_VERSION "0.0.0"
#endif

namespace gevlab {

struct Verdict {
    std::string name;
    bool ok = true;
    std::string detail;
};

struct RunResult {
    std::vector<Table> tables;
    std::vector<Verdict> verdicts;

    bool ok() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.ok; });
    }
    const Table& table(const std::string& name) const {
        for (const auto& t : tables)
            if (t.name == name) return t;
        throw std::out_of_range("no table " + name);
    }
    const Verdict& verdict(const std::string& name) const {
        for (const auto& v : verdicts)
            if (v.name == name) return v;
        throw std::out_of_range("no verdict " + name);
    }
};

namespace detail {

inline std::string printf_str(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

struct Setup {
    FourierSeries2 v;
    Transform T;
    double B = 0.0;
    double S = 0.0;
    std::vector<Torus2Point> phases;
    std::string cid;

    explicit Setup(const ExperimentConfig& c)
        : v(c.series()), T(c.frequencies()), B(potential_bound(v)), S(scaling_factor(c.lambda, B)),
          phases(c.phases.points(c.seed)), cid(constants_id(c.constants)) {}

    CocycleParams params(double lambda, double E) const { return {lambda, E, v, T}; }
};

inline std::vector<std::string> with_cid(std::vector<std::string> row, const std::string& cid) {
    row.push_back(cid);
    return row;
}

}  // namespace detail

/// mean_le over E_grid x scales; rows are ordered by E then N.
inline RunResult run_lyapunov_sweep(const ExperimentConfig& cfg) {
    detail::Setup s(cfg);
    RunResult r;
    Table t{"lyapunov.csv", {"E", "N", "mean_le", "stddev", "flagged", "constants_id"}, {}};
    const bool check = std::fabs(cfg.lambda) >= cfg.positivity_threshold;
    const double target = cfg.constants.gamma * (cfg.lambda != 0 ? std::log(std::fabs(cfg.lambda)) : 0.0);
    std::size_t flags = 0;
    for (double E : cfg.energies.values(cfg.lambda, s.B)) {
        auto p = s.params(cfg.lambda, E);
        for (long N : cfg.scales) {
            auto ms = mean_finite_le(p, N, s.phases, cfg.threads);
            bool flag = check && ms.mean < target;
            flags += flag;
            t.add(detail::with_cid({fmt_num(E), fmt_num(N), fmt_num(ms.mean), fmt_num(ms.stddev), fmt_bool(flag)}, s.cid));
        }
    }
    r.tables.push_back(std::move(t));
    Verdict v{"positivity", flags == 0, ""};
    v.detail = check ? std::to_string(flags) + " flagged (target " + fmt_num(target) + ")" : "check disabled below threshold";
    r.verdicts.push_back(v);
    return r;
}

/// Fraction of phases with |L_N(x) - mean| > N^-tau, per scale.
inline RunResult run_ldt(const ExperimentConfig& cfg) {
    detail::Setup s(cfg);
    RunResult r;
    Table t{"ldt.csv", {"n", "threshold", "fraction", "samples", "source", "mean", "constants_id"}, {}};
    auto p = s.params(cfg.lambda, cfg.energy);
    std::vector<double> fr;
    for (long N : cfg.scales) {
        auto vals = parallel_map<double>(s.phases.size(), cfg.threads, [&](std::size_t i) { return finite_le(s.phases[i], p, N); });
        double mean = mean_std(vals).mean;
        double thr = std::pow(static_cast<double>(N), -cfg.constants.tau);
        std::size_t bad = 0;
        for (double x : vals) bad += std::fabs(x - mean) > thr;
        double f = static_cast<double>(bad) / static_cast<double>(vals.size());
        fr.push_back(f);
        t.add(detail::with_cid({fmt_num(N), fmt_num(thr), fmt_num(f), fmt_num(static_cast<unsigned long>(vals.size())),
                                "finite_le", fmt_num(mean)},
                               s.cid));
    }
    r.tables.push_back(std::move(t));
    bool mono = true;
    for (std::size_t k = 1; k < fr.size(); ++k) mono = mono && fr[k] <= fr[k - 1];
    r.verdicts.push_back({"ldt_monotone", mono, "last fraction " + fmt_num(fr.back())});
    return r;
}

/// Throws ConfigError before any computation when N is not a multiple of
/// N0 or N < 4 N0.
inline RunResult run_multiscale(const ExperimentConfig& cfg) {
    if (cfg.N % cfg.N0 != 0) throw ConfigError("multiscale: N must be a multiple of N0");
    if (cfg.N < 4 * cfg.N0) throw ConfigError("multiscale: N must be >= 4*N0");
    detail::Setup s(cfg);
    auto p = s.params(cfg.lambda, cfg.energy);
    double l0 = mean_finite_le(p, cfg.N0, s.phases, cfg.threads).mean;
    double l2 = mean_finite_le(p, 2 * cfg.N0, s.phases, cfg.threads).mean;
    double lN = mean_finite_le(p, cfg.N, s.phases, cfg.threads).mean;
    double lhs = std::fabs(lN + l0 - 2.0 * l2);
    double rhs = cfg.constants.C0 * s.S * static_cast<double>(cfg.N0) / static_cast<double>(cfg.N);
    bool ok = lhs <= rhs;
    RunResult r;
    Table t{"multiscale.csv", {"N0", "N", "L_N0", "L_2N0", "L_N", "lhs", "rhs", "ok", "constants_id"}, {}};
    t.add(detail::with_cid(
        {fmt_num(cfg.N0), fmt_num(cfg.N), fmt_num(l0), fmt_num(l2), fmt_num(lN), fmt_num(lhs), fmt_num(rhs), fmt_bool(ok)}, s.cid));
    r.tables.push_back(std::move(t));
    r.verdicts.push_back({"multiscale", ok, detail::printf_str("lhs %.4g rhs %.4g", lhs, rhs)});
    return r;
}

struct ConvergenceFit {
    bool converged = false;
    double beta = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    std::size_t points = 0;
};

/// Fits log|L_N - L_2N| against log N over the differences above 1e-6.
inline ConvergenceFit fit_convergence(std::span<const long> scales, std::span<const double> diffs) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < scales.size(); ++i)
        if (diffs[i] >= 1e-6) {
            x.push_back(std::log(static_cast<double>(scales[i])));
            y.push_back(std::log(diffs[i]));
        }
    ConvergenceFit f;
    f.points = x.size();
    if (x.size() < 2) {
        f.converged = true;
        return f;
    }
    auto lf = linear_fit(x, y);
    f.beta = -lf.slope;
    f.intercept = lf.intercept;
    CompensatedSum<> ss;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double e = y[i] - (lf.intercept + lf.slope * x[i]);
        ss.add(e * e);
    }
    f.residual = std::sqrt(ss.value() / static_cast<double>(x.size()));
    return f;
}

inline RunResult run_convergence_fit(const ExperimentConfig& cfg) {
    if (cfg.scales.size() < 4) throw ConfigError("convergence fit needs at least 4 scales");
    detail::Setup s(cfg);
    auto p = s.params(cfg.lambda, cfg.energy);
    RunResult r;
    Table t{"convergence.csv", {"N", "L_N", "L_2N", "diff", "constants_id"}, {}};
    std::vector<double> diffs;
    for (long N : cfg.scales) {
        double a = mean_finite_le(p, N, s.phases, cfg.threads).mean;
        double b = mean_finite_le(p, 2 * N, s.phases, cfg.threads).mean;
        diffs.push_back(std::fabs(a - b));
        t.add(detail::with_cid({fmt_num(N), fmt_num(a), fmt_num(b), fmt_num(diffs.back())}, s.cid));
    }
    auto f = fit_convergence(cfg.scales, diffs);
    Table ft{"convergence_fit.csv", {"status", "beta", "intercept", "residual", "points", "constants_id"}, {}};
    ft.add(detail::with_cid({f.converged ? "converged" : "fitted", f.converged ? "" : fmt_num(f.beta),
                             f.converged ? "" : fmt_num(f.intercept), f.converged ? "" : fmt_num(f.residual),
                             fmt_num(static_cast<unsigned long>(f.points))},
                            s.cid));
    r.tables.push_back(std::move(t));
    r.tables.push_back(std::move(ft));
    r.verdicts.push_back({"convergence_beta", f.converged || f.beta > 0,
                          f.converged ? "converged" : "beta " + fmt_num(f.beta)});
    return r;
}

/// |L_N(E) - L_N(E+d)| against e^{S N} d for each configured d.
inline RunResult run_continuity_probe(const ExperimentConfig& cfg) {
    detail::Setup s(cfg);
    const long N = cfg.continuity_N;
    RunResult r;
    Table t{"continuity.csv", {"N", "E", "E2", "dE", "lhs", "rhs", "ok", "constants_id"}, {}};
    double base = mean_finite_le(s.params(cfg.lambda, cfg.energy), N, s.phases, cfg.threads).mean;
    bool all = true;
    for (double d : cfg.deltas) {
        double E2 = cfg.energy + d;
        double other = mean_finite_le(s.params(cfg.lambda, E2), N, s.phases, cfg.threads).mean;
        double lhs = std::fabs(base - other);
        double ns = s.S * static_cast<double>(N);
        double rhs = ns > 600.0 ? std::numeric_limits<double>::infinity() : std::exp(ns) * std::fabs(d);
        bool ok = lhs <= rhs;
        all = all && ok;
        t.add(detail::with_cid({fmt_num(N), fmt_num(cfg.energy), fmt_num(E2), fmt_num(std::fabs(d)), fmt_num(lhs),
                                fmt_num(rhs), fmt_bool(ok)},
                               s.cid));
    }
    r.tables.push_back(std::move(t));
    r.verdicts.push_back({"continuity", all, std::to_string(cfg.deltas.size()) + " probes"});
    return r;
}

/// Sublevel covers for every (E, eps) with soundness and Monte Carlo checks.
inline RunResult run_loja(const ExperimentConfig& cfg) {
    detail::Setup s(cfg);
    const auto tl = transversality_level(s.v, cfg.loja_m, 64);
    const double A = loja_gradient_bound(s.v, cfg.loja_m);
    LojaOptions opt;
    opt.c_impl = cfg.constants.c_impl;
    opt.C_cov = cfg.constants.C_cov;
    opt.strict = cfg.strict;
    opt.threads = cfg.threads;
    RunResult r;
    Table t{"loja.csv",
            {"E", "eps", "measure_bound", "mc_estimate", "mc_ci95", "escapes", "sublevel_points", "exponent_b",
             "absorbed_area", "refined", "splits", "constants_id"},
            {}};
    if (!(tl.c > 0)) {
        r.verdicts.push_back({"loja_transversality", false, "no transversality at the configured order"});
        r.tables.push_back(std::move(t));
        return r;
    }
    for (std::size_t ie = 0; ie < cfg.loja_energies.size(); ++ie) {
        double E = cfg.loja_energies[ie];
        std::vector<double> le, lm;
        std::size_t escapes = 0, dominated = 0;
        for (std::size_t k = 0; k < cfg.loja_eps.size(); ++k) {
            double eps = cfg.loja_eps[k];
            auto cov = loja_pipeline(s.v, E, eps, cfg.loja_m, tl.c, A, opt);
            auto chk = cover_soundness(cov, s.v, static_cast<std::size_t>(cfg.validation_grid));
            auto mc = mc_sublevel_measure(s.v, E, eps, cfg.mc_samples, cfg.seed + ie * 1000 + k);
            escapes += chk.escapes;
            dominated += cov.measure_bound >= mc.estimate - 3.0 * mc.ci95;
            le.push_back(std::log(eps));
            lm.push_back(std::log(std::max(cov.measure_bound, 1e-300)));
            t.add(detail::with_cid({fmt_num(E), fmt_num(eps), fmt_num(cov.measure_bound), fmt_num(mc.estimate),
                                    fmt_num(mc.ci95), fmt_num(static_cast<unsigned long>(chk.escapes)),
                                    fmt_num(static_cast<unsigned long>(chk.sublevel_points)), fmt_num(cov.exponent_b),
                                    fmt_num(cov.absorbed_area), fmt_num(static_cast<unsigned long>(cov.refined)),
                                    fmt_num(static_cast<unsigned long>(cov.splits))},
                                   s.cid));
            if (cfg.export_cover) {
                Table c{"cover_E" + std::to_string(ie) + "_eps" + std::to_string(k) + ".csv",
                        {"kind", "x1_lo", "x1_hi", "x2_lo", "x2_hi", "certified_bound"},
                        {}};
                for (const auto& b : cov.bad_rects)
                    c.add({"bad", fmt_num(b.a1), fmt_num(b.b1), fmt_num(b.a2), fmt_num(b.b2), ""});
                for (const auto& g : cov.good)
                    c.add({"good", fmt_num(g.rect.a1), fmt_num(g.rect.b1), fmt_num(g.rect.a2), fmt_num(g.rect.b2),
                           fmt_num(g.bound)});
                r.tables.push_back(std::move(c));
            }
        }
        std::string tag = "E=" + fmt_num(E);
        r.verdicts.push_back({"loja_soundness " + tag, escapes == 0, std::to_string(escapes) + " escapes"});
        r.verdicts.push_back({"loja_dominates_mc " + tag, dominated == cfg.loja_eps.size(),
                              std::to_string(dominated) + "/" + std::to_string(cfg.loja_eps.size())});
        if (le.size() >= 2) {
            double slope = linear_fit(le, lm).slope;
            r.verdicts.push_back({"loja_slope " + tag, slope > 0, "slope " + fmt_num(slope)});
        }
    }
    r.tables.insert(r.tables.begin(), std::move(t));
    return r;
}

struct LocalizeSummary {
    double median_gamma = 0.0;
    double median_r2 = 0.0;
};

/// Eigenvector decay fits on localize_phases seeded phases; the medians
/// pool the mid-spectrum states of all phases.
inline RunResult run_localize(const ExperimentConfig& cfg, LocalizeSummary* summary = nullptr) {
    detail::Setup s(cfg);
    auto p = s.params(cfg.lambda, cfg.energy);
    const long N = cfg.localize_N;
    Rng rng(cfg.seed);
    std::vector<Torus2Point> xs;
    for (int i = 0; i < cfg.localize_phases; ++i) xs.push_back(rng.point());
    auto reps = parallel_map<LocalizationReport>(xs.size(), cfg.threads, [&](std::size_t i) { return eigen_decay_report(xs[i], p, N); });

    RunResult r;
    Table t{"localize.csv", {"phase", "eig_index", "eigenvalue", "center", "gamma_fit", "r2", "tail_mass", "constants_id"}, {}};
    std::vector<double> gs, rs;
    for (std::size_t i = 0; i < reps.size(); ++i)
        for (const auto& d : reps[i].states) {
            t.add(detail::with_cid({fmt_num(static_cast<unsigned long>(i)), fmt_num(static_cast<unsigned long>(d.index)),
                                    fmt_num(d.eigenvalue), fmt_num(d.center), fmt_num(d.gamma), fmt_num(d.r2),
                                    fmt_num(d.tail_mass)},
                                   s.cid));
            if (d.index >= static_cast<std::size_t>(N / 4) && d.index < static_cast<std::size_t>(3 * N / 4)) {
                gs.push_back(d.gamma);
                rs.push_back(d.r2);
            }
        }
    r.tables.push_back(std::move(t));

    auto eig = box_eigen(build_box(xs[0], p, N), true);
    Table prof{"localize_profile.csv", {"site", "abs_psi", "constants_id"}, {}};
    const auto& psi = eig.vectors[static_cast<std::size_t>(N / 2)];
    for (std::size_t n = 0; n < psi.size(); ++n)
        prof.add(detail::with_cid({fmt_num(static_cast<unsigned long>(n + 1)), fmt_num(std::fabs(psi[n]))}, s.cid));
    r.tables.push_back(std::move(prof));

    Table gt{"localize_green.csv", {"n1", "n2", "g_abs", "cramer_bound", "constants_id"}, {}};
    try {
        auto g = green_function(xs[0], p, N, 20, cfg.seed);
        for (const auto& c : g.cramer)
            gt.add(detail::with_cid({fmt_num(c.n1), fmt_num(c.n2), fmt_num(c.g_abs), fmt_num(std::exp(c.log_bound))}, s.cid));
        r.verdicts.push_back({"green_cramer", g.cramer_ok, "residual " + fmt_num(g.residual)});
    } catch (const std::domain_error& e) {
        r.verdicts.push_back({"green_cramer", true, std::string("skipped: ") + e.what()});
    }
    r.tables.push_back(std::move(gt));

    LocalizeSummary sm{median(gs), median(rs)};
    if (summary) *summary = sm;
    std::string d = detail::printf_str("median gamma %.4g, median r2 %.4g", sm.median_gamma, sm.median_r2);
    if (std::fabs(cfg.lambda) >= cfg.positivity_threshold) {
        double target = 0.7 * cfg.constants.gamma * std::log(std::fabs(cfg.lambda));
        r.verdicts.push_back({"localization_rate", sm.median_gamma >= target && sm.median_r2 >= 0.8,
                              d + ", target " + fmt_num(target)});
    } else if (cfg.lambda == 0.0) {
        r.verdicts.push_back({"free_control", sm.median_gamma <= 0.05, d});
    } else {
        r.verdicts.push_back({"localization_rate", true, d + ", no check at this coupling"});
    }
    return r;
}

/// Sample counts for the identity, bound and avalanche suites.
struct SuiteSizes {
    long det_N = 1'000'000;
    int det_cases = 10;
    std::uint64_t dyn_n = 10'000;
    int dyn_cases = 20;
    int fejer_cases = 300;
    int fb_cases = 20;
    int det_id_cases = 40;
    int green_cases = 20;
    int fejer_bound_cases = 10'000;
    int invariance_cases = 1'000;
    int trotter_cases = 100;
    int eigen_cases = 50;
    int avalanche_phases = 400;

    static SuiteSizes quick() {
        SuiteSizes s;
        s.det_N = 100'000;
        s.det_cases = 3;
        s.dyn_cases = 5;
        s.invariance_cases = 200;
        s.trotter_cases = 20;
        s.avalanche_phases = 100;
        return s;
    }
};

namespace detail {

struct CheckAcc {
    std::string name;
    std::size_t cases = 0, passed = 0;
    double worst = 0.0, bound = 0.0;

    void add(double value, double b, bool ok) {
        ++cases;
        passed += ok;
        if (cases == 1 || value - b > worst - bound) {
            worst = value;
            bound = b;
        }
    }
    std::vector<std::string> row() const {
        return {name, fmt_num(static_cast<unsigned long>(cases)), fmt_num(static_cast<unsigned long>(passed)), fmt_num(worst),
                fmt_num(bound), fmt_bool(passed == cases)};
    }
};

inline cplx fejer_oracle(std::uint64_t n, double t) {
    long double re = 0, im = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
        long double ph = 2 * 3.14159265358979323846264338327950288L * static_cast<long double>(mul_mod1(k, t));
        re += std::cos(ph);
        im += std::sin(ph);
    }
    return {static_cast<double>(re / n), static_cast<double>(im / n)};
}

inline void finish_suite(RunResult& r, Table& t, const std::vector<CheckAcc>& accs) {
    for (const auto& a : accs) {
        t.add(a.row());
        r.verdicts.push_back({a.name, a.passed == a.cases,
                              std::to_string(a.passed) + "/" + std::to_string(a.cases) + ", worst " + fmt_num(a.worst) +
                                  " vs " + fmt_num(a.bound)});
    }
}

inline const std::vector<std::string> suite_columns{"check", "cases", "passed", "worst_value", "bound_at_worst", "ok"};

}  // namespace detail

/// Exact or near-exact identities; the potential and coupling come from cfg.
inline RunResult run_identity_suite(const ExperimentConfig& cfg, const SuiteSizes& sz) {
    detail::Setup s(cfg);
    Rng rng(cfg.seed);
    const Transform skew = standard_frequencies("golden"), multi = standard_frequencies("golden-pair");
    const auto [elo, ehi] = spectrum_interval(cfg.lambda, s.B);
    RunResult r;
    Table t{"identity.csv", detail::suite_columns, {}};
    std::vector<detail::CheckAcc> accs;

    {
        detail::CheckAcc a{"det_unimodular"};
        std::vector<std::pair<Torus2Point, double>> cases;
        for (int i = 0; i < sz.det_cases; ++i) cases.push_back({rng.point(), rng.uniform(elo, ehi)});
        auto dets = parallel_map<double>(cases.size(), cfg.threads, [&](std::size_t i) {
            CocycleParams p{cfg.lambda, cases[i].second, s.v, i % 2 ? multi : skew};
            auto m = transfer_product(cases[i].first, p, sz.det_N);
            return m.det_sign() == 1 ? std::fabs(m.determinant() - 1.0) : 2.0;
        });
        for (double d : dets) a.add(d, 1e-8, d <= 1e-8);
        accs.push_back(a);
    }
    {
        detail::CheckAcc a{"dynamics_closed_form"};
        for (int i = 0; i < sz.dyn_cases; ++i) {
            Transform T = i % 2 ? multi : Transform{SkewShift{rng.uniform()}};
            Torus2Point x = rng.point();
            std::uint64_t n = 1 + rng.index(sz.dyn_n);
            // a double orbit drifts by ~n^1.5 eps, so compose in long double
            long double y1 = x.x1(), y2 = x.x2();
            for (std::uint64_t k = 0; k < n; ++k) {
                if (const auto* sk = std::get_if<SkewShift>(&T)) {
                    y1 += y2;
                    y2 += sk->omega;
                } else {
                    y1 += std::get<MultiShift>(T).omega1;
                    y2 += std::get<MultiShift>(T).omega2;
                }
                y1 -= std::floor(y1);
                y2 -= std::floor(y2);
            }
            Torus2Point z = iterate(x, T, n);
            double d = std::max(torus_distance(static_cast<double>(z.x1() - y1)), torus_distance(static_cast<double>(z.x2() - y2)));
            a.add(d, 1e-10, d <= 1e-10);
        }
        accs.push_back(a);
    }
    {
        detail::CheckAcc a{"fejer_closed_form"};
        for (int i = 0; i < sz.fejer_cases; ++i) {
            std::uint64_t n = 1 + rng.index(2000);
            double tt = rng.uniform(-3, 3);
            if (torus_distance(tt) < 1e-6) continue;
            double d = std::abs(fejer_kernel(n, tt) - detail::fejer_oracle(n, tt));
            a.add(d, 1e-10, d <= 1e-10);
        }
        accs.push_back(a);
    }
    {
        detail::CheckAcc a{"fourier_birkhoff"};
        for (int i = 0; i < sz.fb_cases; ++i) {
            auto fb = fourier_birkhoff_identity(s.v, rng.point(), multi, 1 + rng.index(2000));
            a.add(fb.gap, 1e-9, fb.gap <= 1e-9);
        }
        accs.push_back(a);
    }
    {
        detail::CheckAcc a{"det_transfer"};
        for (int i = 0; i < sz.det_id_cases; ++i) {
            CocycleParams p{cfg.lambda, rng.uniform(elo, ehi), s.v, i % 2 ? multi : skew};
            long N = 2 + static_cast<long>(rng.index(59));
            auto d = det_transfer_identity(rng.point(), p, N);
            a.add(d.max_gap, 1e-8, d.max_gap <= 1e-8);
        }
        accs.push_back(a);
    }
    {
        detail::CheckAcc a{"green_resolvent"};
        for (int i = 0; i < sz.green_cases; ++i) {
            CocycleParams p{cfg.lambda, rng.uniform(elo, ehi), s.v, i % 2 ? multi : skew};
            long N = 2 + static_cast<long>(rng.index(79));
            try {
                auto g = green_function(rng.point(), p, N, 5, cfg.seed + i);
                a.add(g.residual, 1e-8, g.residual <= 1e-8);
            } catch (const std::domain_error&) {
            }
        }
        accs.push_back(a);
    }
    detail::finish_suite(r, t, accs);
    r.tables.push_back(std::move(t));
    return r;
}

/// Inequalities: Fejer, almost invariance, Trotter, Cramer, eigenvalue range.
inline RunResult run_bound_suite(const ExperimentConfig& cfg, const SuiteSizes& sz) {
    detail::Setup s(cfg);
    Rng rng(cfg.seed + 1);
    const Transform skew = standard_frequencies("golden"), multi = standard_frequencies("golden-pair");
    const auto [elo, ehi] = spectrum_interval(cfg.lambda, s.B);
    RunResult r;
    Table t{"bounds.csv", detail::suite_columns, {}};
    std::vector<detail::CheckAcc> accs;

    {
        detail::CheckAcc a{"fejer_bound"};
        for (int i = 0; i < sz.fejer_bound_cases; ++i) {
            auto c = fejer_bound_check(1 + rng.index(10000), rng.uniform(-5, 5));
            a.add(c.value, c.bound, c.ok);
        }
        accs.push_back(a);
    }
    {
        detail::CheckAcc a{"almost_invariance"};
        struct Case {
            Torus2Point x;
            double E;
            long N;
        };
        std::vector<Case> cases;
        for (int i = 0; i < sz.invariance_cases; ++i)
            cases.push_back({rng.point(), rng.uniform(elo, ehi), 10 + static_cast<long>(rng.index(191))});
        auto res = parallel_map<AlmostInvariance>(cases.size(), cfg.threads, [&](std::size_t i) {
            CocycleParams p{cfg.lambda, cases[i].E, s.v, i % 2 ? multi : skew};
            return almost_invariance_defect(cases[i].x, p, cases[i].N);
        });
        for (const auto& x : res) a.add(x.defect, x.bound, x.ok);
        accs.push_back(a);
    }
    {
        // needs a series with a tail beyond the truncation order
        detail::CheckAcc a{"trotter"};
        auto g = parse_potential("gevrey:s=2,rho=0.5,deg=8,seed=" + std::to_string(cfg.seed));
        for (int i = 0; i < sz.trotter_cases; ++i) {
            double lam = rng.uniform(0.5, 5.0);
            auto [lo, hi] = spectrum_interval(lam, potential_bound(g));
            CocycleParams p{lam, rng.uniform(lo, hi), g, i % 2 ? multi : skew};
            auto tg = trotter_gap(rng.point(), p, 2 + static_cast<long>(rng.index(19)), 1 + static_cast<int>(rng.index(5)), 64);
            a.add(tg.gap, tg.bound, tg.ok);
        }
        accs.push_back(a);
    }
    {
        detail::CheckAcc a{"green_cramer"};
        for (int i = 0; i < sz.green_cases; ++i) {
            CocycleParams p{cfg.lambda, rng.uniform(elo, ehi), s.v, i % 2 ? multi : skew};
            long N = 4 + static_cast<long>(rng.index(77));
            try {
                auto gf = green_function(rng.point(), p, N, 20, cfg.seed + i);
                for (const auto& c : gf.cramer) a.add(c.log_g, c.log_bound, c.ok);
            } catch (const std::domain_error&) {
            }
        }
        accs.push_back(a);
    }
    {
        detail::CheckAcc a{"eigen_in_interval"};
        for (int i = 0; i < sz.eigen_cases; ++i) {
            CocycleParams p{cfg.lambda, 0.0, s.v, i % 2 ? multi : skew};
            auto eig = box_eigen(build_box(rng.point(), p, 4 + static_cast<long>(rng.index(197))), false);
            double worst = 0.0;
            for (double e : eig.values) worst = std::max(worst, std::fabs(e));
            a.add(worst, ehi, worst <= ehi);
        }
        accs.push_back(a);
    }
    detail::finish_suite(r, t, accs);
    r.tables.push_back(std::move(t));
    return r;
}

/// Avalanche principle residuals: exact small cases, then orbit blocks of
/// the configured cocycle (block length N0, 50 blocks).
inline RunResult run_avalanche_suite(const ExperimentConfig& cfg, const SuiteSizes& sz) {
    detail::Setup s(cfg);
    Rng rng(cfg.seed + 2);
    Table t{"avalanche.csv", detail::suite_columns, {}};
    std::vector<detail::CheckAcc> accs;
    {
        detail::CheckAcc a{"avalanche_two_block"};
        for (int i = 0; i < 50; ++i) {
            CocycleParams p{cfg.lambda, rng.uniform(-2, 2), s.v, s.T};
            auto blocks = orbit_blocks(rng.point(), p, cfg.N0, 2);
            auto rep = avalanche_residual(blocks, 2.0, cfg.constants.C_ap);
            a.add(rep.residual, 1e-12, rep.residual <= 1e-12);
        }
        accs.push_back(a);
    }
    {
        detail::CheckAcc a{"avalanche_diagonal"};
        for (int i = 0; i < 20; ++i) {
            std::vector<ScaledProduct> blocks;
            std::size_t n = 2 + rng.index(30);
            double mu = 1e300;
            for (std::size_t j = 0; j < n; ++j) {
                double d = std::exp(rng.uniform(1, 20));
                mu = std::min(mu, d);
                blocks.push_back(ScaledProduct::from_matrix(SL2{d, 0, 0, 1 / d}));
            }
            auto rep = avalanche_residual(blocks, mu, cfg.constants.C_ap);
            a.add(rep.residual, 1e-12, rep.residual <= 1e-12);
        }
        accs.push_back(a);
    }
    RunResult out;
    detail::finish_suite(out, t, accs);

    std::vector<Torus2Point> xs;
    for (int i = 0; i < sz.avalanche_phases; ++i) xs.push_back(rng.point());
    auto p = s.params(cfg.lambda, cfg.energy);
    auto reps = parallel_map<AvalancheReport>(xs.size(), cfg.threads, [&](std::size_t i) {
        auto blocks = orbit_blocks(xs[i], p, cfg.N0, 50);
        return avalanche_residual(blocks, min_block_norm(blocks), cfg.constants.C_ap);
    });
    detail::CheckAcc orbit{"avalanche_orbit"};
    for (const auto& rep : reps)
        if (rep.hyp_ok) orbit.add(rep.residual, rep.bound, rep.residual <= rep.bound);
    t.add(orbit.row());
    double frac = orbit.cases ? static_cast<double>(orbit.passed) / static_cast<double>(xs.size()) : 0.0;
    out.verdicts.push_back({"avalanche_orbit", frac >= 0.99,
                            std::to_string(orbit.passed) + " of " + std::to_string(xs.size()) +
                                " phases satisfy hypothesis and bound"});
    out.tables.push_back(std::move(t));
    return out;
}

inline RunResult run_identity_checks(const ExperimentConfig& cfg, const SuiteSizes& sz) {
    RunResult all;
    for (auto part : {run_identity_suite(cfg, sz), run_bound_suite(cfg, sz), run_avalanche_suite(cfg, sz)}) {
        for (auto& t : part.tables) all.tables.push_back(std::move(t));
        for (auto& v : part.verdicts) all.verdicts.push_back(std::move(v));
    }
    return all;
}

inline std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string command;
    std::string config_hash;
    json config;
    std::string started, finished;
    unsigned threads = 1;
    std::vector<std::pair<std::string, std::size_t>> files;  // name, data rows
    std::vector<Verdict> verdicts;
    Constants constants;

    json to_json() const {
        json j;
        j["command"] = command;
        j["config_hash"] = config_hash;
        j["config"] = config;
        j["code_version"] = GEVLAB_VERSION;
        j["started_utc"] = started;
        j["finished_utc"] = finished;
        j["threads"] = threads;
        j["constants"] = constants_json(constants);
        j["constants_id"] = constants_id(constants);
        j["files"] = json::array();
        for (const auto& [n, rows] : files) j["files"].push_back({{"name", n}, {"rows", rows}});
        j["verdicts"] = json::array();
        for (const auto& v : verdicts) j["verdicts"].push_back({{"name", v.name}, {"ok", v.ok}, {"detail", v.detail}});
        return j;
    }
};

/// Writes every table plus manifest.json into dir.
inline RunManifest persist(const std::filesystem::path& dir, const std::string& command, const ExperimentConfig& cfg,
                           const RunResult& r, const std::string& started) {
    RunManifest m;
    m.command = command;
    m.config_hash = config_hash(cfg);
    m.config = to_json(cfg);
    m.started = started;
    m.threads = cfg.threads;
    m.constants = cfg.constants;
    m.verdicts = r.verdicts;
    for (const auto& t : r.tables) {
        write_table(dir, t);
        m.files.emplace_back(t.name, t.rows.size());
    }
    m.finished = utc_now();
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "manifest.json");
    out << m.to_json().dump(2) << '\n';
    return m;
}

}  // namespace gevlab
