#ifndef NEGM_RNG_HPP
#define NEGM_RNG_HPP

#include <cstdint>
#include <random>

namespace negm {

// splitmix64 mixing; used to derive independent deterministic streams from
// (seed, tag...) so checkpoint resume replays the exact same randomness.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t seed) { return mix64(seed); }

template <typename... Rest>
uint64_t derive_seed(uint64_t seed, uint64_t tag, Rest... rest) {
    return derive_seed(mix64(seed ^ mix64(tag)), rest...);
}

template <typename... Tags>
std::mt19937_64 derive_rng(uint64_t seed, Tags... tags) {
    return std::mt19937_64(derive_seed(seed, static_cast<uint64_t>(tags)...));
}

// stream tags, so unrelated draws never share a stream
enum RngStream : uint64_t {
    kStreamInit = 1,
    kStreamMutation = 2,
    kStreamTraining = 3,
    kStreamAttack = 4,
    kStreamData = 5,
    kStreamChild = 6,
};

}  // namespace negm

#endif
