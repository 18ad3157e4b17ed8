#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sgf/aoi.hpp"
#include "sgf/baselines.hpp"
#include "sgf/channel.hpp"
#include "sgf/mac.hpp"
#include "sgf/rng.hpp"

namespace sgf::sim {

enum class LevelSupply {
  physical,  // levels follow from budgets under the chosen combiner
  fixed,     // exogenous N_tot levels, SIC always feasible
};

// How the upper agent's reals become a combiner.
enum class UpperAction {
  direct,       // the reals are the combiner columns
  zf_residual,  // the reals are added to the unit-norm zero-forcing columns
};

struct EnvConfig {
  channel::RadioConfig radio;
  mac::MacConfig mac;
  aoi::GarConfig gar;
  std::size_t num_gbus{3};
  std::size_t num_gfus{5};
  LevelSupply supply{LevelSupply::physical};
  std::size_t fixed_levels{3};
  UpperAction upper_action{UpperAction::direct};

  void validate() const;
};

struct SlotRecord {
  std::int64_t slot{0};
  std::size_t n_levels{0};
  std::size_t n_attempts{0};
  std::size_t n_success{0};
  std::size_t n_sic_failed{0};
  bool collision{false};
  double tp{0.0};
  double sum_gbu_rate{0.0};
  double sum_gfu_rate{0.0};
  double throughput{0.0};
  double penalty{0.0};  // sum_k max(0, target - R_k)
  double mean_age{0.0};
  std::int64_t max_age{0};
  std::size_t n_waiting{0};
};

// One cell for one episode at a time. A slot runs in two stages so the two
// agents can act in order: begin_slot fixes the combiner (budgets, levels,
// update generation), finish_slot lets waiting GFUs attempt and advances time.
class SgfEnvironment {
 public:
  SgfEnvironment(EnvConfig config, std::uint64_t seed);

  void reset(std::uint64_t episode);

  std::int64_t slot() const { return t_; }
  bool done() const { return t_ >= config_.gar.horizon; }
  const EnvConfig& config() const { return config_; }
  const channel::RadioParams& radio() const { return radio_; }
  const channel::ChannelSnapshot& snapshot() const { return snapshot_; }

  // GBU CSI as 2*K*A reals, scaled by the strongest GBU channel norm.
  Eigen::VectorXd upper_state() const;
  std::size_t upper_state_dim() const { return 2 * config_.num_gbus * static_cast<std::size_t>(radio_.num_antennas); }

  void begin_slot(const mac::DetectionMatrix& v);

  Eigen::VectorXd lower_state() const;
  policy::LowerContext lower_context() const;

  SlotRecord finish_slot(double transmission_probability);

  const std::vector<aoi::GfuAoiState>& aoi_states() const { return ages_; }
  const mac::SlotOutcome& last_outcome() const { return outcome_; }
  const mac::InterferenceBudget& budget() const { return budget_; }
  const mac::SnrLevelPlan& plan() const { return plan_; }
  const mac::DetectionMatrix& detection() const { return detection_; }
  const std::vector<channel::UserPosition>& gbu_positions() const { return gbu_pos_; }
  const std::vector<channel::UserPosition>& gfu_positions() const { return gfu_pos_; }

 private:
  void advance_channel();

  EnvConfig config_;
  channel::RadioParams radio_;
  std::uint64_t seed_;
  std::int64_t t_{0};
  bool slot_open_{false};

  Rng placement_rng_;
  Rng mobility_rng_;
  Rng fading_rng_;
  Rng gfu_placement_rng_;
  Rng gfu_mobility_rng_;
  Rng gfu_fading_rng_;
  Rng contention_rng_;
  Rng attempt_rng_;

  std::vector<channel::UserPosition> gbu_pos_;
  std::vector<channel::UserPosition> gfu_pos_;
  channel::ChannelSnapshot snapshot_;
  std::vector<aoi::GfuAoiState> ages_;
  mac::DetectionMatrix detection_;
  mac::InterferenceBudget budget_;
  mac::SnrLevelPlan plan_;
  mac::SlotOutcome outcome_;
};

}  // namespace sgf::sim
