#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace sgf {

// All randomness flows through explicitly passed engines. Distributions are
// constructed per draw so the engine alone carries the stream state.
using Rng = std::mt19937_64;

// SplitMix64-style mixing of a base seed with a stream id, so that sibling
// streams (placement, fading, contention, policy, ...) are decorrelated.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

inline Rng make_rng(std::uint64_t base, std::uint64_t stream) { return Rng(mix_seed(base, stream)); }

double standard_normal(Rng& rng);
double uniform01(Rng& rng);
bool bernoulli(Rng& rng, double p);

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& text);

namespace streams {
inline constexpr std::uint64_t placement = 1;
inline constexpr std::uint64_t mobility = 2;
inline constexpr std::uint64_t fading = 3;
inline constexpr std::uint64_t contention = 4;
inline constexpr std::uint64_t attempts = 5;
inline constexpr std::uint64_t lower_policy = 6;
inline constexpr std::uint64_t upper_policy = 7;
inline constexpr std::uint64_t init = 8;
// GFU-side draws get their own streams so GBU channels do not depend on K'.
inline constexpr std::uint64_t gfu_placement = 9;
inline constexpr std::uint64_t gfu_mobility = 10;
inline constexpr std::uint64_t gfu_fading = 11;
}  // namespace streams

}  // namespace sgf
