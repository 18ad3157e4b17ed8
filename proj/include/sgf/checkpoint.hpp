#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sgf/ppo.hpp"
#include "sgf/rng.hpp"

namespace sgf::ckpt {

inline constexpr int kFormatVersion = 1;

// Trained agents of one run. Stored as versioned JSON; weights and optimizer
// moments are written with round-trip precision.
struct Bundle {
  std::optional<rl::PpoAgent> lower;
  std::optional<rl::PpoAgent> upper;
  std::uint64_t config_hash{0};
  std::optional<Rng> policy_rng;
};

std::string architecture_descriptor(const rl::AgentSpaces& spaces, int hidden_units);

void save(const Bundle& bundle, const std::string& path);

// Reads the bundle. An agent whose stored architecture differs from the
// expected one is rejected with ConfigError.
Bundle load(const std::string& path, const std::optional<rl::AgentSpaces>& expect_lower,
            const std::optional<rl::AgentSpaces>& expect_upper, int hidden_units);

}  // namespace sgf::ckpt
