#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynamics.hpp"

namespace gevlab {

/// Seeded 64-bit generator with a platform-independent mapping to [0,1).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t index(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }
    Torus2Point point() {
        double a = uniform();
        return {a, uniform()};
    }

private:
    std::mt19937_64 eng_;
};

enum class PhaseMode { grid, lowdisc };

inline PhaseMode parse_phase_mode(const std::string& s) {
    if (s == "grid") return PhaseMode::grid;
    if (s == "lowdisc" || s == "mc") return PhaseMode::lowdisc;
    throw std::invalid_argument("unknown phase mode: " + s);
}

/// n x n cell-centred grid (offset in cell units, default half a cell).
inline std::vector<Torus2Point> grid_phases(int n, double offset = 0.5) {
    if (n < 1) throw std::invalid_argument("grid_phases: n must be positive");
    std::vector<Torus2Point> out;
    out.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.emplace_back((i + offset) / n, (j + offset) / n);
    return out;
}

/// Additive recurrence on the plastic number (R2 sequence) with a seeded
/// Cranley-Patterson rotation.
inline std::vector<Torus2Point> lowdisc_phases(std::size_t count, std::uint64_t seed) {
    constexpr double g = 1.32471795724474602596;
    const double a1 = 1.0 / g, a2 = 1.0 / (g * g);
    Rng rng(seed);
    double s1 = rng.uniform(), s2 = rng.uniform();
    std::vector<Torus2Point> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        out.emplace_back(s1 + mul_mod1(static_cast<std::uint64_t>(k + 1), a1),
                         s2 + mul_mod1(static_cast<std::uint64_t>(k + 1), a2));
    return out;
}

/// For grid mode `count` is rounded up to a square.
inline std::vector<Torus2Point> phase_set(PhaseMode mode, std::size_t count, std::uint64_t seed) {
    if (mode == PhaseMode::grid) {
        int n = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)) - 1e-9));
        return grid_phases(n);
    }
    return lowdisc_phases(count, seed);
}

}  // namespace gevlab
