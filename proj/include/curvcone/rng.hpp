// Deterministic RNG utilities. Every randomized routine takes an explicit
// 64-bit seed; task-level seeds are derived with splitmix64 so results do
// not depend on thread scheduling.
#pragma once

#include <cstdint>
#include <cmath>

namespace curvcone {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive an independent stream seed from (master, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x51ed2701a9b5d4f3ULL));
}

// xoshiro256** -- small, fast, reproducible across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& si : s_) {
            x = splitmix64(x);
            si = x;
        }
        has_gauss_ = false;
        gauss_ = 0.0;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0,1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Standard normal via Box-Muller (cached pair).
    double gaussian() {
        if (has_gauss_) {
            has_gauss_ = false;
            return gauss_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 1e-300);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        gauss_ = r * std::sin(a);
        has_gauss_ = true;
        return r * std::cos(a);
    }

    // Uniform integer in [0, m).
    std::uint64_t uniform_index(std::uint64_t m) {
        return next_u64() % m;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
    bool has_gauss_;
    double gauss_;
};

} // namespace curvcone
