#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sgf/baselines.hpp"
#include "sgf/environment.hpp"
#include "sgf/mac.hpp"
#include "sgf/ppo.hpp"

namespace sgf::train {

// Chooses the combiner for the current slot from the environment's CSI.
using UpperDecide = std::function<mac::DetectionMatrix(const sim::SgfEnvironment&)>;
// Chooses the transmission probability from the ages and slot context.
using LowerDecide = std::function<double(const Eigen::VectorXd&, const policy::LowerContext&)>;
using SlotSink = std::function<void(const sim::SlotRecord&)>;

enum class UpperMode { zero_forcing, random, learned };

struct EpisodeSummary {
  double mean_aoi{0.0};      // slot-average of the post-update mean age
  double throughput{0.0};    // slot-average of GBU + GFU rates, bits/s/Hz
  double gbu_throughput{0.0};
  double gfu_throughput{0.0};
  double penalty{0.0};
  std::size_t successes{0};
  std::size_t collisions{0};
};

struct EpisodeMetrics {
  int episode{0};
  double mean_aoi{0.0};
  double throughput{0.0};
  double upper_loss{0.0};
  double lower_loss{0.0};
  double clip_fraction{0.0};
};

struct TrainResult {
  rl::PpoAgent lower;
  std::optional<rl::PpoAgent> upper;
  std::vector<EpisodeMetrics> log;
  std::uint64_t steps{0};
};

UpperDecide zero_forcing_upper();
// Gaussian reals mapped through the same reshaping the learned agent uses.
UpperDecide random_upper(Rng& rng);
UpperDecide learned_upper(const rl::PpoAgent& agent);
LowerDecide baseline_lower(const policy::PolicySpec& spec);
LowerDecide learned_lower(const rl::PpoAgent& agent);

mac::DetectionMatrix detection_from_action(const Eigen::VectorXd& raw, const sim::SgfEnvironment& env);

// Resets env to the given episode and plays it to the horizon.
EpisodeSummary run_episode(sim::SgfEnvironment& env, std::uint64_t episode, const UpperDecide& upper,
                           const LowerDecide& lower, const SlotSink& sink = {});

rl::AgentSpaces lower_spaces(const sim::EnvConfig& env);
rl::AgentSpaces upper_spaces(const sim::EnvConfig& env);

using EpisodeCallback = std::function<void(const EpisodeMetrics&)>;

// Lower agent alone; the combiner is fixed to zero forcing.
TrainResult train_lower(const sim::EnvConfig& env, const rl::PpoConfig& ppo, int episodes, std::uint64_t seed,
                        const EpisodeCallback& on_episode = {});

// Both agents, each updated at its own period.
TrainResult train_hierarchical(const sim::EnvConfig& env, const rl::PpoConfig& ppo, int episodes,
                               std::uint64_t seed, const EpisodeCallback& on_episode = {});

// One episode per seed, each on an environment seeded by that value.
// Seeds are evaluated on up to `threads` workers; results keep seed order.
std::vector<EpisodeSummary> evaluate(const sim::EnvConfig& env, UpperMode upper_mode, const rl::PpoAgent* upper,
                                     const policy::PolicySpec& lower_spec, const rl::PpoAgent* lower,
                                     const std::vector<std::uint64_t>& seeds, unsigned threads = 1);

double mean_of(const std::vector<EpisodeSummary>& runs, double EpisodeSummary::*field);

}  // namespace sgf::train
