#include "vpc/rng.hpp"

namespace vpc {

namespace {

// splitmix64 finalizer; full-period mixing of a 64-bit word.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter) {
    // Two mixing rounds over the keyed counter; the odd multipliers keep
    // distinct (seed, stream) pairs from aliasing.
    std::uint64_t z = mix64(seed ^ (stream * 0xda942042e4dd58b5ull));
    return mix64(z ^ (counter * 0xe7037ed1a0b428dbull));
}

}  // namespace vpc
