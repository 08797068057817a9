#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tmpc {

// splitmix64 step. Used both as a stream generator and as a seed mixer so
// that every random draw in the project is reproducible across platforms
// (std::mt19937 distributions are implementation-defined; these are not).
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30u)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27u)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31u);
}

// Combines two seeds into an independent stream seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ull + (b << 6) + (b >> 2));
    return splitmix64_next(s);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

// FNV-1a over bytes, finalized through splitmix. Stable content hash for
// dedup digests and content-keyed noise.
inline std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t salt = 0) {
    std::uint64_t h = 1469598103934665603ull ^ salt;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return splitmix64_next(h);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53; }

    // Uniform in [0, n). n = 0 returns 0.
    std::size_t next_index(std::size_t n) {
        if (n == 0) {
            return 0;
        }
        return static_cast<std::size_t>(next_double() * static_cast<double>(n)) % n;
    }

    // Standard normal via Box-Muller; caches the spare draw.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        const double u2 = next_double();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double two_pi = 6.283185307179586476925286766559;
        spare_ = mag * std::sin(two_pi * u2);
        has_spare_ = true;
        return mag * std::cos(two_pi * u2);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace tmpc
