#pragma once

// Random number plumbing.
//
// Engine: std::mt19937_64, whose output sequence is fully fixed by the C++
// standard. Distributions come from Boost.Random rather than <random> because
// the libstdc++/libc++/MSVC implementations of std::normal_distribution and
// std::poisson_distribution produce different streams. Independent substreams
// (one per particle, one per frame) are seeded by hashing (seed, stream index)
// with SplitMix64.

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace lptem {

using Engine = std::mt19937_64;

inline constexpr const char* kRngDescription =
    "mt19937_64 seeded by splitmix64(seed, stream); boost.random distributions";

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for stream `stream` of a run seeded with `seed`. Streams with distinct
/// (domain, index) never share a seed in practice.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t domain,
                                       std::uint64_t index) noexcept {
    return splitmix64(splitmix64(splitmix64(seed) ^ domain) + index);
}

// Stream domains.
inline constexpr std::uint64_t kDomainTrajectory = 0x7472616aULL; // "traj"
inline constexpr std::uint64_t kDomainFrame = 0x6672616dULL;      // "fram"
inline constexpr std::uint64_t kDomainScene = 0x7363656eULL;      // "scen"

inline Engine make_engine(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) {
    return Engine{substream_seed(seed, domain, index)};
}

inline double standard_normal(Engine& rng) {
    return boost::random::normal_distribution<double>{0.0, 1.0}(rng);
}

inline double uniform01(Engine& rng) {
    return boost::random::uniform_01<double>{}(rng);
}

inline long poisson(Engine& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    return boost::random::poisson_distribution<long, double>{mean}(rng);
}

} // namespace lptem
