#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mtoc {

/// Deterministic random stream. The engine is std::mt19937_64 (fully pinned
/// by the standard); all value transforms are implemented here rather than
/// with std::*_distribution so that two builds on different standard
/// libraries draw identical sequences.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; draws two uniforms per pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        // avoid log(0)
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * kPi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Rayleigh magnitude with scale sigma, via the inverse CDF.
    double rayleigh(double sigma) {
        double u = uniform();
        while (u <= 0.0) u = uniform();  // 1-u in (0,1]
        return sigma * std::sqrt(-2.0 * std::log(u));
    }

    /// Uniform integer in [0, bound); rejection-sampled, no modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return r % bound;
        }
    }

private:
    static constexpr double kPi = 3.14159265358979323846;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 mix, used to derive independent sub-stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic sub-seed for a named stream ("shuffle", "dropout", ...)
/// plus an index (receiver slot, epoch, sweep row).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t index = 0) {
    std::uint64_t h = base;
    for (char c : tag) h = mix_seed(h ^ static_cast<std::uint8_t>(c));
    return mix_seed(h ^ mix_seed(index));
}

}  // namespace mtoc
