#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "bbsmix/math.hpp"

namespace bbsmix {

// SplitMix64 step; used to spread user seeds and derive per-task streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic stream id for (seed, indices...). Parallel replicates draw
// from independent streams so serial and threaded runs agree bit for bit.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = master;
    splitmix64(s);
    s ^= 0x5851f42d4c957f2dull * (a + 1);
    splitmix64(s);
    s ^= 0x14057b7ef767814full * (b + 1);
    splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ull * (c + 1);
    return splitmix64(s);
}

// Seeded generator. Uniform/normal variates are produced by fixed, engine-
// specified recipes (no std::*_distribution) so output is identical across
// standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on (0, 1); 53-bit mantissa, never returns exactly 0 or 1.
    double uniform() {
        const std::uint64_t bits = engine_() >> 11;
        double u = (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return std_normal_quantile(uniform()); }

    // Marsaglia-Tsang; shape > 0, unit scale.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_squared(double nu) { return 2.0 * gamma(0.5 * nu); }

    double student_t(double nu) { return normal() / std::sqrt(chi_squared(nu) / nu); }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace bbsmix
