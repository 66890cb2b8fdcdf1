#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gevlab/config.hpp"
#include "gevlab/harness.hpp"
#include "gevlab/plot.hpp"

using namespace gevlab;

namespace {

struct Overrides {
    std::optional<std::string> frequency, potential;
    std::optional<double> lambda, energy;
    std::optional<long> N;
    std::vector<double> eps;
    bool strict = false, full = false, export_cover = false;
};

int report(const std::string& cmd, const ExperimentConfig& cfg, const RunResult& r, const std::string& started) {
    auto m = persist(cfg.output, cmd, cfg, r, started);
    std::printf("config %s -> %s\n", m.config_hash.c_str(), cfg.output.c_str());
    for (const auto& f : m.files) std::printf("  %s (%zu rows)\n", f.first.c_str(), f.second);
    int failed = 0;
    for (const auto& v : r.verdicts) {
        std::printf("%s %s: %s\n", v.ok ? "PASS" : "FAIL", v.name.c_str(), v.detail.c_str());
        failed += !v.ok;
    }
    if (failed) {
        std::fprintf(stderr, "%d assertion(s) failed\n", failed);
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-periodic Schroedinger cocycle experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "Experiment config (JSON)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Seed");

    Overrides ov;
    auto physics = [&](CLI::App* s) {
        s->add_option("--frequency", ov.frequency, "golden, sqrt2, pair, golden-pair, skew:<w>, multi:<w1>,<w2>");
        s->add_option("--potential", ov.potential, "cosine, cos-sum, constant:<c>, gevrey:..., file:<path>");
        s->add_option("--lambda", ov.lambda, "Coupling");
        s->add_option("--energy", ov.energy, "Energy");
    };

    auto* lyap = app.add_subcommand("lyapunov", "Finite-scale exponent sweep over the energy grid");
    physics(lyap);
    lyap->add_option("--N", ov.N, "Single scale instead of the configured list");
    auto* ldt = app.add_subcommand("ldt", "Deviation fractions per scale");
    physics(ldt);
    auto* ms = app.add_subcommand("multiscale", "Multiscale bound and convergence fit");
    physics(ms);
    ms->add_option("--N", ov.N, "Largest scale");
    auto* cont = app.add_subcommand("continuity", "Energy continuity probe");
    physics(cont);
    cont->add_option("--N", ov.N, "Scale");
    auto* loja = app.add_subcommand("loja", "Sublevel covers with soundness and Monte Carlo checks");
    physics(loja);
    loja->add_option("--eps", ov.eps, "Sublevel levels");
    loja->add_flag("--strict", ov.strict, "Fail on ladder-infeasible squares");
    loja->add_flag("--export-cover", ov.export_cover, "Write the cover rectangles");
    auto* loc = app.add_subcommand("localize", "Eigenvector decay fits and Green function checks");
    physics(loc);
    loc->add_option("--N", ov.N, "Box size");
    auto* ids = app.add_subcommand("identity-checks", "Identity, bound and avalanche suites");
    physics(ids);
    ids->add_flag("--full", ov.full, "Full sample counts (slow)");
    auto* plot = app.add_subcommand("plot", "Render an SVG from a CSV");
    std::string csv, kind, svg;
    plot->add_option("--csv", csv, "Input CSV")->required();
    plot->add_option("--kind", kind, "le_vs_E, ldt_curve, decay_profile, loja_loglog, continuity")
        ->required()
        ->check(CLI::IsMember(plot_kinds()));
    plot->add_option("--svg", svg, "Output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (plot->parsed()) {
        try {
            emit_plot(csv, kind, svg);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "plot: %s\n", e.what());
            return 1;
        }
        return 0;
    }

    ExperimentConfig cfg;
    try {
        if (!config_path.empty()) cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.output = out_dir;
        cfg.threads = threads;
        if (seed) cfg.seed = *seed;
        if (ov.frequency) cfg.transform = *ov.frequency;
        if (ov.potential) cfg.potential = *ov.potential;
        if (ov.lambda) cfg.lambda = *ov.lambda;
        if (ov.energy) cfg.energy = *ov.energy;
        if (!ov.eps.empty()) cfg.loja_eps = ov.eps;
        if (ov.strict) cfg.strict = true;
        if (ov.export_cover) cfg.export_cover = true;
        if (ov.N) {
            if (lyap->parsed()) cfg.scales = {*ov.N};
            if (ms->parsed()) cfg.N = *ov.N;
            if (cont->parsed()) cfg.continuity_N = *ov.N;
            if (loc->parsed()) cfg.localize_N = *ov.N;
        }
        validate(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    }

    const std::string started = utc_now();
    std::string cmd = app.get_subcommands().front()->get_name();
    RunResult r;
    try {
        if (lyap->parsed()) r = run_lyapunov_sweep(cfg);
        else if (ldt->parsed()) r = run_ldt(cfg);
        else if (ms->parsed()) {
            r = run_multiscale(cfg);
            if (cfg.scales.size() >= 4) {
                auto c = run_convergence_fit(cfg);
                for (auto& t : c.tables) r.tables.push_back(std::move(t));
                for (auto& v : c.verdicts) r.verdicts.push_back(std::move(v));
            }
        } else if (cont->parsed()) r = run_continuity_probe(cfg);
        else if (loja->parsed()) r = run_loja(cfg);
        else if (loc->parsed()) r = run_localize(cfg);
        else if (ids->parsed()) r = run_identity_checks(cfg, ov.full ? SuiteSizes{} : SuiteSizes::quick());
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const CertificationFailed& e) {
        r.verdicts.push_back({"certification", false, e.what()});
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return report(cmd, cfg, r, started);
}
