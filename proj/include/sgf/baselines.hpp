#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace sgf::policy {

// min(1, L / M)
double adaptive_tp(std::size_t num_levels, std::size_t num_gfus);

// 1 / (M - j); zero once every GFU is served.
double state_dependent_tp(std::size_t num_gfus, std::size_t num_served);

double fixed_tp(double p);

enum class PolicyKind { fixed, adaptive, state_dependent, learned };

// Parsed form of --policy {fixed:p|adaptive|state-dependent|learned:path}.
struct PolicySpec {
  PolicyKind kind{PolicyKind::adaptive};
  double p{0.0};
  std::string checkpoint;

  static PolicySpec parse(std::string_view text);
  std::string to_string() const;
};

// What the schedulers may look at on a slot.
struct LowerContext {
  std::size_t num_levels{0};
  std::size_t num_gfus{0};
  std::size_t num_served{0};
};

double baseline_tp(const PolicySpec& spec, const LowerContext& ctx);

}  // namespace sgf::policy
