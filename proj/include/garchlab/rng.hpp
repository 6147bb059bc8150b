#pragma once

#include <cstdint>
#include <random>

namespace garchlab {

// Identifies one reproducible random stream. Distinct (base_seed,
// stream_index) pairs give independent streams; replicates can therefore be
// run in any order or on any number of threads without changing results.
struct SeedSpec {
    std::uint64_t base_seed = 0;
    std::uint64_t stream_index = 0;

    SeedSpec with_stream(std::uint64_t idx) const { return {base_seed, idx}; }
};

namespace detail {
// SplitMix64 step, used to whiten the (base_seed, stream_index) pair into
// engine seed material.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

inline std::mt19937_64 make_engine(const SeedSpec& seed) {
    std::uint64_t s = seed.base_seed;
    std::uint64_t a = detail::splitmix64(s);
    s ^= 0xd1b54a32d192ed03ULL * (seed.stream_index + 1);
    std::uint64_t b = detail::splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace garchlab
