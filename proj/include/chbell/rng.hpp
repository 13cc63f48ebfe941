#pragma once

#include <cmath>
#include <cstdint>

// Self-contained fixed-algorithm RNG so that seeded runs are byte-identical
// across toolchains (std::<random> distributions are implementation-defined).
// Pinned algorithms: SplitMix64 for seeding / stream derivation (Steele,
// Lea, Flood 2014) and xoshiro256++ 1.0 (Blackman, Vigna 2019) as the core
// generator. Poisson sampling uses Knuth's product method on chunks of the
// mean so the exp() never underflows; normals use Box-Muller.

namespace chbell {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Child stream seed from a master seed and a fixed label. Configurations,
/// channels and purposes get independent streams no matter how work is
/// scheduled.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t label) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64_next(s);
    s ^= label * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    return a ^ splitmix64_next(s);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    /// Unbiased uniform integer in [0, bound) (Lemire's method).
    std::uint64_t uniform_below(std::uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Poisson draw; the mean is split into chunks <= 400 so exp(-chunk)
    /// stays representable. Cost is O(mean) uniforms.
    std::uint64_t poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        std::uint64_t total = 0;
        const int chunks = static_cast<int>(mean / 400.0) + 1;
        const double lambda = mean / chunks;
        const double limit = std::exp(-lambda);
        for (int c = 0; c < chunks; ++c) {
            double prod = uniform();
            std::uint64_t k = 0;
            while (prod > limit) {
                ++k;
                prod *= uniform();
            }
            total += k;
        }
        return total;
    }

    /// Standard normal, Box-Muller with the spare value cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        constexpr double two_pi = 6.283185307179586;
        spare_ = r * std::sin(two_pi * u2);
        have_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4]{};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace chbell
