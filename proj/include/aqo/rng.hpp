#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace aqo {

// Deterministic PRNG used everywhere randomness is needed, so that outputs
// are reproducible bit for bit across platforms and compilers. The standard
// library engines are portable but its distributions are not, hence the
// explicit rejection sampling in below().
//
// Algorithm: xoshiro256++ (Blackman and Vigna), state seeded by running
// splitmix64 four times over the 64-bit seed. Both generators are public
// domain reference constructions; constants appear verbatim.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // Unbiased draw from {0, 1, ..., n-1} via rejection. n must be nonzero.
    uint64_t below(uint64_t n);

    // Uniform double in [0, 1) with 53 random bits.
    double unit_real();

    // Derives an independent child seed from a root seed, a purpose label,
    // and an index. Used to split one command-level seed into per-instance,
    // per-iteration, or per-chain streams: the derivation is documented as
    //   child = splitmix64(root ^ fnv1a64(label) + index * 0x9e3779b97f4a7c15)
    // so external tooling can reproduce any stream in isolation.
    static uint64_t derive(uint64_t root, std::string_view label, uint64_t index = 0);

    static uint64_t splitmix64(uint64_t& state);
    static uint64_t fnv1a64(std::string_view bytes);

private:
    std::array<uint64_t, 4> s_;
};

}  // namespace aqo
