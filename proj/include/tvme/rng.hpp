#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tvme {

/// splitmix64 step. Used as the seed-derivation mixer so that substreams are
/// decorrelated regardless of how the caller numbers them.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed-splitting rule: substream `stream` of `master` is obtained by two
/// splitmix64 steps over (master, stream). Parallel workers must derive their
/// seed through this function only, so results do not depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s = a ^ stream;
    return splitmix64(s);
}

/// Deterministic random source. Distributions are implemented explicitly
/// (Box-Muller, Lemire bounded) instead of through std:: distribution objects
/// so that a given seed yields the same stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Standard normal via the trigonometric Box-Muller transform.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0,1]: avoid log(0).
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Uniform index in [0, n) (Lemire's multiply-shift; bias < 2^-64).
    std::size_t uniform_index(std::size_t n) {
        using u128 = unsigned __int128;
        return static_cast<std::size_t>((static_cast<u128>(gen_()) * static_cast<u128>(n)) >> 64);
    }

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace tvme
