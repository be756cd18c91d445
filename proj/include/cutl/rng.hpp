#pragma once

#include <cstdint>

// Self-contained pseudo-random machinery. The standard <random> engines are
// portable, but the *distributions* are implementation-defined, which would
// break bit-identical reproducibility across toolchains. Everything downstream
// of a seed therefore goes through this header: xoshiro256++ for the stream,
// splitmix64 for seeding and for deriving independent per-replica streams.

namespace cutl {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
}

} // namespace detail

// xoshiro256++ (Blackman & Vigna). 256-bit state, 64-bit output, passes the
// usual batteries; more than adequate for Monte Carlo counting statistics.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        // Expand the seed through splitmix64 as the xoshiro authors recommend;
        // guarantees a nonzero state for every seed.
        std::uint64_t sm = seed;
        for (auto& word : s_) word = detail::splitmix64(sm);
    }

    // Seed of the independent stream `stream` under run key `seed`; distinct
    // (seed, stream) pairs hash to unrelated state expansions.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t h = stream;
        std::uint64_t mixed = detail::splitmix64(h) ^ seed;
        return detail::splitmix64(mixed);
    }

    static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(derive(seed, stream));
    }

    std::uint64_t next() {
        const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53 random bits; the usual (x >> 11) * 2^-53.
    double uniform() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Bernoulli(p): exact for p = 0 and p = 1 since uniform() < 1 strictly.
    bool bernoulli(double p) { return uniform() < p; }

    // Unbiased integer in [0, n) by rejection (n must be >= 1).
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        for (;;) {
            const std::uint64_t v = next();
            if (v < limit) return v % n;
        }
    }

    // Fair sign, one stream draw.
    double sign() { return (next() & 1) ? 1.0 : -1.0; }

private:
    std::uint64_t s_[4];
};

} // namespace cutl
