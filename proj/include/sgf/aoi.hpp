#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sgf::aoi {

struct GfuAoiState {
  std::int64_t age{1};
  std::int64_t generation_time{0};
  bool waiting{true};  // holds an undelivered update
};

// Generate-at-Request: every GFU regenerates on slots with t % generation_period == 0.
struct GarConfig {
  std::int64_t generation_period{3};
  std::int64_t horizon{100};

  void validate() const;
};

std::vector<GfuAoiState> initial_states(std::size_t count);

[[nodiscard]] std::vector<GfuAoiState> maybe_generate(std::int64_t t, std::vector<GfuAoiState> states,
                                                      const GarConfig& config);

// Success resets the age to one slot and clears waiting; anything else ages by one.
[[nodiscard]] GfuAoiState update_aoi(GfuAoiState state, bool succeeded);

double average_aoi(std::span<const GfuAoiState> states);
std::int64_t max_age(std::span<const GfuAoiState> states);
std::size_t count_waiting(std::span<const GfuAoiState> states);

}  // namespace sgf::aoi
