#pragma once

#include <cstdint>
#include <vector>

namespace skewlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** with a uniform draw defined bit-exactly, so results do not
// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // Independent stream number `index` derived from a master seed.
    static Rng stream(std::uint64_t master, std::uint64_t index) {
        std::uint64_t sm = master ^ 0x6a09e667f3bcc909ULL;
        std::uint64_t a = splitmix64(sm);
        std::uint64_t b = index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
        return Rng(a ^ splitmix64(b));
    }

    std::uint64_t next() {
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

    // Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Index drawn from a cumulative table (last entry is the total).
inline std::size_t draw_cumulative(const double* cum, std::size_t n, double u) {
    const double target = u * cum[n - 1];
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (target < cum[i]) return i;
    return n - 1;
}

}  // namespace skewlab
