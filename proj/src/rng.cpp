#include "aqo/rng.hpp"

#include "aqo/errors.hpp"

namespace aqo {

namespace {

inline uint64_t rotl(uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

uint64_t Rng::splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t Rng::fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Rng::Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

uint64_t Rng::next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

uint64_t Rng::below(uint64_t n) {
    if (n == 0) throw InputError("Rng::below: n must be nonzero");
    // Reject draws from the final partial block so every residue is equally
    // likely. threshold = 2^64 mod n, computed without 128-bit arithmetic.
    const uint64_t threshold = (0 - n) % n;
    uint64_t r;
    do {
        r = next_u64();
    } while (r < threshold);
    return r % n;
}

double Rng::unit_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t Rng::derive(uint64_t root, std::string_view label, uint64_t index) {
    uint64_t state = (root ^ fnv1a64(label)) + index * 0x9e3779b97f4a7c15ULL;
    return splitmix64(state);
}

}  // namespace aqo
