#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "cocycle.hpp"
#include "dynamics.hpp"
#include "potential_io.hpp"
#include "sampling.hpp"
#include "transversality.hpp"

namespace gevlab {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Constants the theory leaves non-effective; every run records them.
struct Constants {
    double tau = 0.25;
    double sigma = 0.25;
    double gamma = 0.25;
    double C0 = 4.0;
    double kappa = 0.01;
    double c_impl = 0.5;
    double C_cov = 8.0;
    double C_ap = 10.0;
};

struct EnergyGrid {
    bool spectrum_auto = false;
    double lo = -12.0;
    double hi = 12.0;
    int count = 33;

    std::vector<double> values(double lambda, double B) const {
        double a = lo, b = hi;
        if (spectrum_auto) std::tie(a, b) = spectrum_interval(lambda, B);
        std::vector<double> out;
        if (count == 1) return {0.5 * (a + b)};
        for (int i = 0; i < count; ++i) out.push_back(a + (b - a) * i / (count - 1));
        return out;
    }
};

struct PhaseSampling {
    PhaseMode mode = PhaseMode::grid;
    int grid_n = 64;
    std::size_t n = 4096;  // lowdisc count

    std::vector<Torus2Point> points(std::uint64_t seed) const {
        return mode == PhaseMode::grid ? grid_phases(grid_n) : lowdisc_phases(n, seed);
    }
};

struct ExperimentConfig {
    std::string transform = "golden";
    std::string potential = "cos-sum";
    double lambda = 10.0;
    std::uint64_t seed = 1;
    EnergyGrid energies;
    PhaseSampling phases;
    std::vector<long> scales{50, 100, 200, 400};
    double positivity_threshold = 5.0;

    long N0 = 20;
    long N = 400;

    double energy = 0.0;
    long continuity_N = 30;
    std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};

    std::vector<double> loja_energies{0.0, 1.5};
    std::vector<double> loja_eps{1e-2, 1e-3, 1e-4};
    MultiIndex loja_m{2, 2};
    int validation_grid = 1024;
    std::size_t mc_samples = 1'000'000;
    bool strict = false;
    bool export_cover = false;

    long localize_N = 256;
    int localize_phases = 4;

    Constants constants;

    // not part of the hash
    std::string output = "gevlab-out";
    unsigned threads = 1;

    Transform frequencies() const { return standard_frequencies(transform); }
    FourierSeries2 series() const { return parse_potential(potential); }
    CocycleParams params(double E) const { return {lambda, E, series(), frequencies()}; }
};

namespace detail {

/// Integral doubles become integers so 10 and 10.0 hash alike.
inline json normalize_numbers(const json& j) {
    if (j.is_object()) {
        json out = json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = normalize_numbers(it.value());
        return out;
    }
    if (j.is_array()) {
        json out = json::array();
        for (const auto& e : j) out.push_back(normalize_numbers(e));
        return out;
    }
    if (j.is_number_float()) {
        double d = j.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9.0e15) return static_cast<std::int64_t>(d);
    }
    if (j.is_number_unsigned() && j.get<std::uint64_t>() <= static_cast<std::uint64_t>(INT64_MAX))
        return static_cast<std::int64_t>(j.get<std::uint64_t>());
    return j;
}

inline void reject_unknown(const json& j, const json& known, const std::string& where) {
    if (!j.is_object()) return;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.contains(it.key())) throw ConfigError("unknown config key: " + where + it.key());
        if (known[it.key()].is_object() && it.value().is_object())
            reject_unknown(it.value(), known[it.key()], where + it.key() + ".");
    }
}

template <class T>
void take(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace detail

inline json constants_json(const Constants& c) {
    return detail::normalize_numbers(json{{"tau", c.tau},         {"sigma", c.sigma}, {"gamma", c.gamma},
                                          {"C0", c.C0},           {"kappa", c.kappa}, {"c_impl", c.c_impl},
                                          {"C_cov", c.C_cov},     {"C_ap", c.C_ap}});
}

/// The hashed form: every field resolved, keys sorted, numerals normalized.
inline json to_json(const ExperimentConfig& c) {
    json j;
    j["transform"] = c.transform;
    j["potential"] = c.potential;
    j["lambda"] = c.lambda;
    j["seed"] = c.seed;
    j["energies"] = {{"auto", c.energies.spectrum_auto}, {"lo", c.energies.lo}, {"hi", c.energies.hi}, {"count", c.energies.count}};
    j["phases"] = {{"mode", c.phases.mode == PhaseMode::grid ? "grid" : "lowdisc"}, {"grid_n", c.phases.grid_n}, {"n", c.phases.n}};
    j["scales"] = c.scales;
    j["positivity_threshold"] = c.positivity_threshold;
    j["multiscale"] = {{"N0", c.N0}, {"N", c.N}};
    j["continuity"] = {{"E", c.energy}, {"N", c.continuity_N}, {"deltas", c.deltas}};
    j["loja"] = {{"energies", c.loja_energies},
                 {"eps", c.loja_eps},
                 {"m", {c.loja_m.a1, c.loja_m.a2}},
                 {"validation_grid", c.validation_grid},
                 {"mc_samples", c.mc_samples},
                 {"strict", c.strict},
                 {"export_cover", c.export_cover}};
    j["localize"] = {{"N", c.localize_N}, {"phases", c.localize_phases}};
    j["constants"] = constants_json(c.constants);
    return detail::normalize_numbers(j);
}

inline std::string canonical_text(const ExperimentConfig& c) { return to_json(c).dump(); }

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a64(canonical_text(c))); }
inline std::string constants_id(const Constants& c) { return hex64(fnv1a64(constants_json(c).dump())).substr(0, 8); }

inline void validate(const ExperimentConfig& c) {
    try {
        (void)c.frequencies();
        (void)c.series();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (c.scales.empty()) throw ConfigError("scales must not be empty");
    for (std::size_t i = 0; i < c.scales.size(); ++i) {
        if (c.scales[i] < 1) throw ConfigError("scales must be positive");
        if (i && c.scales[i] <= c.scales[i - 1]) throw ConfigError("scales must be strictly increasing");
    }
    if (c.energies.count < 1) throw ConfigError("energies.count must be >= 1");
    if (!c.energies.spectrum_auto && c.energies.hi < c.energies.lo) throw ConfigError("energies.hi < energies.lo");
    if (c.phases.mode == PhaseMode::grid && c.phases.grid_n < 4) throw ConfigError("phases.grid_n must be >= 4");
    if (c.phases.mode == PhaseMode::lowdisc && c.phases.n < 1) throw ConfigError("phases.n must be >= 1");
    if (c.N0 < 1 || c.N < 1 || c.continuity_N < 1) throw ConfigError("N0, N and continuity.N must be positive");
    if (c.loja_m.a1 < 0 || c.loja_m.a2 < 0 || c.loja_m.a1 + c.loja_m.a2 == 0) throw ConfigError("loja.m must be nonzero");
    for (double e : c.loja_eps)
        if (!(e > 0 && e < 1)) throw ConfigError("loja.eps entries must lie in (0,1)");
    if (c.localize_N < 16) throw ConfigError("localize.N must be >= 16");
    if (c.localize_phases < 1) throw ConfigError("localize.phases must be >= 1");
}

inline ExperimentConfig config_from_json(const json& in) {
    ExperimentConfig c;
    json known = to_json(c);
    known["output"] = "";
    json j = in;
    if (j.contains("energies") && j["energies"].is_string()) {
        if (j["energies"] != "spectrum-auto") throw ConfigError("energies must be an object or \"spectrum-auto\"");
        j["energies"] = {{"auto", true}};
    }
    detail::reject_unknown(j, known, "");
    try {
        detail::take(j, "transform", c.transform);
        detail::take(j, "potential", c.potential);
        detail::take(j, "lambda", c.lambda);
        detail::take(j, "seed", c.seed);
        detail::take(j, "positivity_threshold", c.positivity_threshold);
        detail::take(j, "scales", c.scales);
        detail::take(j, "output", c.output);
        if (j.contains("energies")) {
            const auto& e = j["energies"];
            detail::take(e, "auto", c.energies.spectrum_auto);
            detail::take(e, "lo", c.energies.lo);
            detail::take(e, "hi", c.energies.hi);
            detail::take(e, "count", c.energies.count);
        }
        if (j.contains("phases")) {
            const auto& p = j["phases"];
            if (p.contains("mode")) c.phases.mode = parse_phase_mode(p["mode"].get<std::string>());
            detail::take(p, "grid_n", c.phases.grid_n);
            detail::take(p, "n", c.phases.n);
        }
        if (j.contains("multiscale")) {
            detail::take(j["multiscale"], "N0", c.N0);
            detail::take(j["multiscale"], "N", c.N);
        }
        if (j.contains("continuity")) {
            const auto& p = j["continuity"];
            detail::take(p, "E", c.energy);
            detail::take(p, "N", c.continuity_N);
            detail::take(p, "deltas", c.deltas);
        }
        if (j.contains("loja")) {
            const auto& p = j["loja"];
            detail::take(p, "energies", c.loja_energies);
            detail::take(p, "eps", c.loja_eps);
            if (p.contains("m")) {
                auto m = p["m"].get<std::vector<int>>();
                if (m.size() != 2) throw ConfigError("loja.m must have two entries");
                c.loja_m = {m[0], m[1]};
            }
            detail::take(p, "validation_grid", c.validation_grid);
            detail::take(p, "mc_samples", c.mc_samples);
            detail::take(p, "strict", c.strict);
            detail::take(p, "export_cover", c.export_cover);
        }
        if (j.contains("localize")) {
            detail::take(j["localize"], "N", c.localize_N);
            detail::take(j["localize"], "phases", c.localize_phases);
        }
        if (j.contains("constants")) {
            const auto& k = j["constants"];
            auto& C = c.constants;
            detail::take(k, "tau", C.tau);
            detail::take(k, "sigma", C.sigma);
            detail::take(k, "gamma", C.gamma);
            detail::take(k, "C0", C.C0);
            detail::take(k, "kappa", C.kappa);
            detail::take(k, "c_impl", C.c_impl);
            detail::take(k, "C_cov", C.C_cov);
            detail::take(k, "C_ap", C.C_ap);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    validate(c);
    return c;
}

inline ExperimentConfig config_from_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be an object");
    return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_text(ss.str());
}

}  // namespace gevlab
