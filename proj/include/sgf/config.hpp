#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgf/environment.hpp"
#include "sgf/ppo.hpp"

namespace sgf {

struct OracleSettings {
  std::size_t num_gfus{2};
  std::size_t num_levels{1};
  std::string policy{"fixed:0.5"};
  std::int64_t slots{1000000};
  int age_cap{50};
};

struct ExperimentConfig {
  sim::EnvConfig env;
  rl::PpoConfig ppo;
  std::string policy{"adaptive"};  // lower policy for eval
  std::string upper{"zf"};         // zf | random | learned:<checkpoint>
  int episodes{6000};
  std::vector<std::uint64_t> eval_seeds{1000, 1001, 1002, 1003, 1004, 1005, 1006, 1007, 1008, 1009};
  std::uint64_t seed{1};
  std::string output_dir{"out"};
  std::string run_id;  // empty: derived from mode and seed
  unsigned threads{1};
  std::vector<std::string> sweep_policies{"fixed:0.2", "adaptive", "state-dependent"};
  std::vector<std::size_t> scale_gfus{3, 6, 9, 12, 15};
  bool write_slots{true};
  OracleSettings oracle;

  void validate() const;
};

// Sets one key from its text form. Throws ConfigError on unknown keys or bad values.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
// Applies a "key=value" override.
void apply_override(ExperimentConfig& config, const std::string& assignment);
// Reads flat key=value text; '#' starts a comment, blank lines are skipped.
ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

// Every key in a fixed order; parsing the echo reproduces the config exactly.
std::string echo_config(const ExperimentConfig& config);
std::vector<std::string> config_keys();
// FNV-1a over the echo, ignoring output location and worker count.
std::uint64_t config_hash(const ExperimentConfig& config);

}  // namespace sgf
