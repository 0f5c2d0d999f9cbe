#pragma once

#include <cstdint>
#include <random>

namespace groupnav {

/// Derives independent stream seeds from a base seed and stream ids
/// (splitmix64 mixing). Used to seed per-environment, per-episode and
/// per-trial generators so results do not depend on scheduling.
uint64_t mix_seed(uint64_t base, uint64_t a = 0, uint64_t b = 0);

/// Deterministic RNG: mt19937_64 engine (bit-portable per the standard)
/// with hand-rolled transforms, since the standard library distributions
/// are implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), n >= 1.
    int uniform_int(int n) {
        const auto v = static_cast<int>(uniform() * static_cast<double>(n));
        return v < n ? v : n - 1;
    }

    /// Standard normal via Box-Muller (stateless: two uniforms per call).
    double normal();

    /// Poisson sample by Knuth's product method; fine for small lambda.
    int poisson(double lambda);

private:
    std::mt19937_64 gen_;
};

}  // namespace groupnav
