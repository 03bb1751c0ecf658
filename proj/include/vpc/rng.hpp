#pragma once

#include <cstdint>

namespace vpc {

/// Counter-based random stream: every draw is a pure function of
/// (seed, stream, counter), so per-run substreams are independent of
/// execution order and of how many other streams exist.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream), counter_(0) {}

    std::uint64_t next_u64() {
        return mix(seed_, stream_, counter_++);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_;
};

/// Stream identifiers for the ensemble substreams; run k draws phases
/// from {seed_k, Phases} and its conditioned winner from {seed_k, Winner}.
enum class StreamId : std::uint64_t {
    Phases = 0x9e3779b97f4a7c15ull,
    Winner = 0xd1b54a32d192ed03ull,
};

inline CounterRng make_stream(std::uint64_t seed, StreamId id) {
    return CounterRng(seed, static_cast<std::uint64_t>(id));
}

}  // namespace vpc
