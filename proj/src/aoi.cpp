#include "sgf/aoi.hpp"

#include <algorithm>

#include "sgf/errors.hpp"

namespace sgf::aoi {

void GarConfig::validate() const {
  if (generation_period < 1) throw ConfigError("generation_period must be >= 1");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
}

std::vector<GfuAoiState> initial_states(std::size_t count) { return std::vector<GfuAoiState>(count); }

std::vector<GfuAoiState> maybe_generate(std::int64_t t, std::vector<GfuAoiState> states, const GarConfig& config) {
  if (t % config.generation_period != 0) return states;
  for (auto& s : states) {
    s.generation_time = t;
    s.waiting = true;
  }
  return states;
}

GfuAoiState update_aoi(GfuAoiState state, bool succeeded) {
  if (succeeded) {
    state.age = 1;
    state.waiting = false;
  } else {
    ++state.age;
  }
  return state;
}

double average_aoi(std::span<const GfuAoiState> states) {
  if (states.empty()) throw ConfigError("average AoI of an empty GFU population");
  double total = 0.0;
  for (const auto& s : states) total += static_cast<double>(s.age);
  return total / static_cast<double>(states.size());
}

std::int64_t max_age(std::span<const GfuAoiState> states) {
  std::int64_t m = 0;
  for (const auto& s : states) m = std::max(m, s.age);
  return m;
}

std::size_t count_waiting(std::span<const GfuAoiState> states) {
  return static_cast<std::size_t>(std::count_if(states.begin(), states.end(), [](const auto& s) { return s.waiting; }));
}

}  // namespace sgf::aoi
