#include "sgf/environment.hpp"

#include <algorithm>
#include <cmath>

#include "sgf/errors.hpp"

namespace sgf::sim {

void EnvConfig::validate() const {
  radio.validate();
  gar.validate();
  if (num_gbus < 1) throw ConfigError("num_gbus must be >= 1");
  if (num_gfus < 1) throw ConfigError("num_gfus must be >= 1");
  if (mac.max_levels_per_gbu < 1) throw ConfigError("max_levels must be >= 1");
}

SgfEnvironment::SgfEnvironment(EnvConfig config, std::uint64_t seed)
    : config_(std::move(config)), radio_(config_.radio.linear()), seed_(seed) {
  config_.validate();
  reset(0);
}

void SgfEnvironment::reset(std::uint64_t episode) {
  const std::uint64_t base = mix_seed(seed_, episode);
  placement_rng_ = make_rng(base, streams::placement);
  mobility_rng_ = make_rng(base, streams::mobility);
  fading_rng_ = make_rng(base, streams::fading);
  gfu_placement_rng_ = make_rng(base, streams::gfu_placement);
  gfu_mobility_rng_ = make_rng(base, streams::gfu_mobility);
  gfu_fading_rng_ = make_rng(base, streams::gfu_fading);
  contention_rng_ = make_rng(base, streams::contention);
  attempt_rng_ = make_rng(base, streams::attempts);

  gbu_pos_ = channel::place_users(config_.num_gbus, radio_.placement_std_km, radio_.d_min_km, placement_rng_);
  gfu_pos_ = channel::place_users(config_.num_gfus, radio_.placement_std_km, radio_.d_min_km, gfu_placement_rng_);
  t_ = 0;
  slot_open_ = false;
  ages_ = aoi::initial_states(config_.num_gfus);
  snapshot_ = channel::sample_snapshot(gbu_pos_, gfu_pos_, radio_, t_, fading_rng_, gfu_fading_rng_);
  outcome_ = {};
}

Eigen::VectorXd SgfEnvironment::upper_state() const {
  const std::size_t a = static_cast<std::size_t>(radio_.num_antennas);
  Eigen::VectorXd s(static_cast<Eigen::Index>(upper_state_dim()));
  double strongest = 0.0;
  for (const auto& h : snapshot_.gbu_channels) strongest = std::max(strongest, h.norm());
  const double scale = strongest > 0.0 ? 1.0 / strongest : 0.0;
  Eigen::Index i = 0;
  for (const auto& h : snapshot_.gbu_channels) {
    for (std::size_t n = 0; n < a; ++n) {
      s(i++) = h(static_cast<Eigen::Index>(n)).real() * scale;
      s(i++) = h(static_cast<Eigen::Index>(n)).imag() * scale;
    }
  }
  return s;
}

void SgfEnvironment::begin_slot(const mac::DetectionMatrix& v) {
  if (done()) throw ConfigError("episode horizon exhausted; call reset()");
  if (v.num_gbus() != config_.num_gbus || v.num_antennas() != radio_.num_antennas) {
    throw ConfigError("detection matrix shape does not match the cell");
  }
  detection_ = v;
  if (config_.supply == LevelSupply::physical) {
    budget_ = mac::compute_budget(snapshot_, detection_, radio_);
    plan_ = mac::build_plan(budget_, radio_, config_.mac);
  } else {
    budget_ = {};
    plan_ = {};
    plan_.cascade_mode = config_.mac.cascade_mode;
    plan_.per_gbu_levels.assign(1, std::vector<double>(config_.fixed_levels, std::exp2(radio_.target_rate) - 1.0));
  }
  ages_ = aoi::maybe_generate(t_, std::move(ages_), config_.gar);
  slot_open_ = true;
}

Eigen::VectorXd SgfEnvironment::lower_state() const {
  Eigen::VectorXd s(static_cast<Eigen::Index>(ages_.size()));
  for (std::size_t i = 0; i < ages_.size(); ++i) s(static_cast<Eigen::Index>(i)) = static_cast<double>(ages_[i].age);
  return s;
}

policy::LowerContext SgfEnvironment::lower_context() const {
  policy::LowerContext ctx;
  ctx.num_levels = plan_.total_levels();
  ctx.num_gfus = config_.num_gfus;
  ctx.num_served = config_.num_gfus - aoi::count_waiting(ages_);
  return ctx;
}

SlotRecord SgfEnvironment::finish_slot(double transmission_probability) {
  if (!slot_open_) throw ConfigError("finish_slot called before begin_slot");
  if (!(transmission_probability >= 0.0 && transmission_probability <= 1.0)) {
    throw ConfigError("transmission probability outside [0, 1]");
  }

  std::vector<std::size_t> attempting;
  for (std::size_t i = 0; i < ages_.size(); ++i) {
    // Every GFU consumes one draw so streams stay aligned across policies.
    const bool attempt = bernoulli(attempt_rng_, transmission_probability);
    if (ages_[i].waiting && attempt) attempting.push_back(i);
  }

  SlotRecord rec;
  rec.slot = t_;
  rec.tp = transmission_probability;
  if (config_.supply == LevelSupply::physical) {
    outcome_ = mac::resolve_slot(plan_, budget_, attempting, snapshot_, detection_, radio_, config_.mac,
                                 contention_rng_);
  } else {
    // Exogenous levels: every matched attempt decodes at the target rate.
    outcome_ = {};
    outcome_.attempts = attempting;
    outcome_.total_levels = plan_.total_levels();
    outcome_.gbu_rates.assign(config_.num_gbus, 0.0);
    outcome_.gfu_rates.assign(config_.num_gfus, 0.0);
    const auto c = mac::contend(attempting.size(), outcome_.total_levels, config_.mac.contention, contention_rng_);
    outcome_.collision_flag = c.collision;
    for (std::size_t i = 0; i < attempting.size(); ++i) {
      if (c.slot_of_attempt[i] == mac::ContentionResult::npos) {
        outcome_.collided.push_back(attempting[i]);
        continue;
      }
      outcome_.admissions.push_back({attempting[i], 0, c.slot_of_attempt[i], true});
      outcome_.successes.push_back(attempting[i]);
      outcome_.gfu_rates[attempting[i]] = radio_.target_rate;
    }
    std::sort(outcome_.successes.begin(), outcome_.successes.end());
  }

  std::vector<bool> succeeded(ages_.size(), false);
  for (std::size_t g : outcome_.successes) succeeded[g] = true;
  for (std::size_t i = 0; i < ages_.size(); ++i) ages_[i] = aoi::update_aoi(ages_[i], succeeded[i]);

  rec.n_levels = outcome_.total_levels;
  rec.n_attempts = outcome_.attempts.size();
  rec.n_success = outcome_.successes.size();
  for (const auto& adm : outcome_.admissions) rec.n_sic_failed += adm.success ? 0 : 1;
  rec.collision = outcome_.collision_flag;
  for (double r : outcome_.gbu_rates) {
    rec.sum_gbu_rate += r;
    if (config_.supply == LevelSupply::physical) rec.penalty += std::max(0.0, radio_.target_rate - r);
  }
  for (double r : outcome_.gfu_rates) rec.sum_gfu_rate += r;
  rec.throughput = rec.sum_gbu_rate + rec.sum_gfu_rate;
  rec.mean_age = aoi::average_aoi(ages_);
  rec.max_age = aoi::max_age(ages_);
  rec.n_waiting = aoi::count_waiting(ages_);

  slot_open_ = false;
  ++t_;
  advance_channel();
  return rec;
}

void SgfEnvironment::advance_channel() {
  gbu_pos_ = channel::step_mobility(gbu_pos_, radio_.mobility_std_km, radio_.d_min_km, mobility_rng_);
  gfu_pos_ = channel::step_mobility(gfu_pos_, radio_.mobility_std_km, radio_.d_min_km, gfu_mobility_rng_);
  snapshot_ = channel::sample_snapshot(gbu_pos_, gfu_pos_, radio_, t_, fading_rng_, gfu_fading_rng_);
}

}  // namespace sgf::sim
