#pragma once

#include <cstddef>
#include <cstdint>

#include "sgf/baselines.hpp"
#include "sgf/mac.hpp"

namespace sgf::oracle {

// Small cell with an exogenous level supply and SIC always feasible.
struct OracleSpec {
  std::size_t num_gfus{1};    // K', at most 3
  std::size_t num_levels{1};  // N_tot
  policy::PolicySpec policy;  // fixed, adaptive or state-dependent
  std::int64_t generation_period{3};
  mac::ContentionRule contention{mac::ContentionRule::all_fail};
  int age_cap{50};
  double tolerance{1e-10};  // total variation between successive periods
  int max_periods{1000000};
  std::size_t max_states{100000};

  void validate() const;
};

struct OracleResult {
  double mean_aoi{0.0};   // stationary, averaged over the slots of one period
  double cap_mass{0.0};   // probability that some age sits at the cap
  std::size_t states{0};  // reachable (phase-start) states
  int periods{0};
};

// Propagates the exact distribution over (ages, waiting flags) one generation
// period at a time until it stops changing. Throws ConfigError when the
// reachable state space exceeds max_states.
OracleResult markov_oracle_expected_aoi(const OracleSpec& spec);

// Expected mean age averaged over slots 0..horizon-1 from the initial state.
double transient_mean_aoi(const OracleSpec& spec, std::int64_t horizon);

// Closed form for one GFU under a fixed probability, by renewal over delivery instants.
double single_gfu_expected_aoi(double p, std::int64_t generation_period);

struct SimComparison {
  double oracle{0.0};
  double simulated{0.0};
  double relative_deviation{0.0};
  double standard_error{0.0};  // batch-means estimate for the simulated mean
  std::int64_t slots{0};
};

// Runs the slot simulator on the same cell for `slots` slots. `sim_rule`
// overrides the simulator's contention rule, for perturbation checks.
SimComparison compare_sim_to_oracle(const OracleSpec& spec, std::int64_t slots, std::uint64_t seed,
                                    mac::ContentionRule sim_rule);
SimComparison compare_sim_to_oracle(const OracleSpec& spec, std::int64_t slots, std::uint64_t seed);

}  // namespace sgf::oracle
