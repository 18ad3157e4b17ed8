#include "sgf/training.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <numeric>

#include "sgf/errors.hpp"

namespace sgf::train {

namespace {

constexpr std::uint64_t kTrainStream = 0x7472616e;

struct UpdateTally {
  double lower_loss{0.0};
  double upper_loss{0.0};
  double clip{0.0};
  int lower_updates{0};
  int upper_updates{0};
};

EpisodeMetrics finish_metrics(int episode, const EpisodeSummary& s, const UpdateTally& tally,
                              const EpisodeMetrics& previous) {
  EpisodeMetrics m;
  m.episode = episode;
  m.mean_aoi = s.mean_aoi;
  m.throughput = s.throughput;
  // Episodes without an update carry the last reported losses forward.
  m.lower_loss = tally.lower_updates > 0 ? tally.lower_loss / tally.lower_updates : previous.lower_loss;
  m.upper_loss = tally.upper_updates > 0 ? tally.upper_loss / tally.upper_updates : previous.upper_loss;
  m.clip_fraction = tally.lower_updates > 0 ? tally.clip / tally.lower_updates : previous.clip_fraction;
  return m;
}

void accumulate(EpisodeSummary& s, const sim::SlotRecord& rec) {
  s.mean_aoi += rec.mean_age;
  s.throughput += rec.throughput;
  s.gbu_throughput += rec.sum_gbu_rate;
  s.gfu_throughput += rec.sum_gfu_rate;
  s.penalty += rec.penalty;
  s.successes += rec.n_success;
  s.collisions += rec.collision ? 1 : 0;
}

void normalize(EpisodeSummary& s, std::int64_t slots) {
  const double n = static_cast<double>(std::max<std::int64_t>(slots, 1));
  s.mean_aoi /= n;
  s.throughput /= n;
  s.gbu_throughput /= n;
  s.gfu_throughput /= n;
  s.penalty /= n;
}

TrainResult train_impl(const sim::EnvConfig& env_config, const rl::PpoConfig& ppo, int episodes,
                       std::uint64_t seed, bool hierarchical, const EpisodeCallback& on_episode) {
  ppo.validate();
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  sim::SgfEnvironment env(env_config, mix_seed(seed, kTrainStream));

  TrainResult result;
  result.lower = rl::PpoAgent(lower_spaces(env_config), ppo, mix_seed(seed, streams::lower_policy));
  if (hierarchical) result.upper.emplace(upper_spaces(env_config), ppo, mix_seed(seed, streams::upper_policy));
  Rng lower_rng = make_rng(seed, streams::lower_policy);
  Rng upper_rng = make_rng(seed, streams::upper_policy);

  EpisodeMetrics previous;
  for (int ep = 0; ep < episodes; ++ep) {
    env.reset(static_cast<std::uint64_t>(ep));
    EpisodeSummary summary;
    UpdateTally tally;
    while (!env.done()) {
      rl::Transition upper_t;
      if (hierarchical) {
        upper_t.state = env.upper_state();
        const auto sample = result.upper->act(upper_t.state, upper_rng);
        upper_t.action = sample.raw;
        upper_t.log_prob_old = sample.log_prob;
        env.begin_slot(detection_from_action(sample.raw, env));
      } else {
        env.begin_slot(mac::DetectionMatrix::zero_forcing(env.snapshot().gbu_channels));
      }

      rl::Transition lower_t;
      lower_t.state = env.lower_state();
      const auto sample = result.lower.act(lower_t.state, lower_rng);
      lower_t.action = sample.raw;
      lower_t.log_prob_old = sample.log_prob;
      const sim::SlotRecord rec = env.finish_slot(std::clamp(sample.action(0), 0.0, 1.0));
      accumulate(summary, rec);

      lower_t.reward = -rec.mean_age * ppo.reward_scale;
      lower_t.next_state = env.lower_state();
      result.lower.store(std::move(lower_t));
      if (hierarchical) {
        upper_t.reward = (rec.throughput - ppo.penalty_lambda * rec.penalty) * ppo.reward_scale;
        upper_t.next_state = env.upper_state();
        result.upper->store(std::move(upper_t));
      }

      ++result.steps;
      if (result.steps % static_cast<std::uint64_t>(ppo.lower_update_period) == 0) {
        const auto st = result.lower.update();
        tally.lower_loss += st.critic_loss;
        tally.clip += st.clip_fraction;
        ++tally.lower_updates;
      }
      if (hierarchical && result.steps % static_cast<std::uint64_t>(ppo.upper_update_period) == 0) {
        const auto st = result.upper->update();
        tally.upper_loss += st.critic_loss;
        ++tally.upper_updates;
      }
    }
    normalize(summary, env.slot());
    previous = finish_metrics(ep, summary, tally, previous);
    result.log.push_back(previous);
    if (on_episode) on_episode(previous);
  }
  return result;
}

}  // namespace

// Residual reals are shrunk so the initial exploration stays near zero forcing.
constexpr double kResidualScale = 0.1;

mac::DetectionMatrix detection_from_action(const Eigen::VectorXd& raw, const sim::SgfEnvironment& env) {
  const int antennas = env.radio().num_antennas;
  const int gbus = static_cast<int>(env.config().num_gbus);
  if (env.config().upper_action == sim::UpperAction::direct) {
    return mac::DetectionMatrix::from_reals(std::span<const double>(raw.data(), static_cast<std::size_t>(raw.size())),
                                            antennas, gbus);
  }
  if (raw.size() != 2 * antennas * gbus) throw ConfigError("detection action has wrong dimension");
  Eigen::MatrixXcd v = mac::DetectionMatrix::zero_forcing(env.snapshot().gbu_channels).matrix();
  Eigen::Index i = 0;
  for (int k = 0; k < gbus; ++k) {
    for (int a = 0; a < antennas; ++a, i += 2) v(a, k) += kResidualScale * std::complex<double>(raw(i), raw(i + 1));
  }
  return mac::DetectionMatrix::normalized(std::move(v));
}

UpperDecide zero_forcing_upper() {
  return [](const sim::SgfEnvironment& env) { return mac::DetectionMatrix::zero_forcing(env.snapshot().gbu_channels); };
}

UpperDecide random_upper(Rng& rng) {
  return [&rng](const sim::SgfEnvironment& env) {
    Eigen::VectorXd raw(static_cast<Eigen::Index>(env.upper_state_dim()));
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw(i) = standard_normal(rng);
    return detection_from_action(raw, env);
  };
}

UpperDecide learned_upper(const rl::PpoAgent& agent) {
  return [&agent](const sim::SgfEnvironment& env) {
    return detection_from_action(agent.actor().mean(env.upper_state()), env);
  };
}

LowerDecide baseline_lower(const policy::PolicySpec& spec) {
  if (spec.kind == policy::PolicyKind::learned) throw ConfigError("learned policy needs a loaded agent");
  return [spec](const Eigen::VectorXd&, const policy::LowerContext& ctx) { return policy::baseline_tp(spec, ctx); };
}

LowerDecide learned_lower(const rl::PpoAgent& agent) {
  return [&agent](const Eigen::VectorXd& ages, const policy::LowerContext&) {
    return std::clamp(agent.act_deterministic(ages)(0), 0.0, 1.0);
  };
}

EpisodeSummary run_episode(sim::SgfEnvironment& env, std::uint64_t episode, const UpperDecide& upper,
                           const LowerDecide& lower, const SlotSink& sink) {
  env.reset(episode);
  EpisodeSummary s;
  while (!env.done()) {
    env.begin_slot(upper(env));
    const double tp = lower(env.lower_state(), env.lower_context());
    const auto rec = env.finish_slot(tp);
    accumulate(s, rec);
    if (sink) sink(rec);
  }
  normalize(s, env.slot());
  return s;
}

rl::AgentSpaces lower_spaces(const sim::EnvConfig& env) {
  return {static_cast<int>(env.num_gfus), 1, rl::Squash::sigmoid};
}

rl::AgentSpaces upper_spaces(const sim::EnvConfig& env) {
  const int dim = 2 * static_cast<int>(env.num_gbus) * env.radio.num_antennas;
  return {dim, dim, rl::Squash::identity};
}

TrainResult train_lower(const sim::EnvConfig& env, const rl::PpoConfig& ppo, int episodes, std::uint64_t seed,
                        const EpisodeCallback& on_episode) {
  return train_impl(env, ppo, episodes, seed, false, on_episode);
}

TrainResult train_hierarchical(const sim::EnvConfig& env, const rl::PpoConfig& ppo, int episodes,
                               std::uint64_t seed, const EpisodeCallback& on_episode) {
  return train_impl(env, ppo, episodes, seed, true, on_episode);
}

std::vector<EpisodeSummary> evaluate(const sim::EnvConfig& env_config, UpperMode upper_mode,
                                     const rl::PpoAgent* upper, const policy::PolicySpec& lower_spec,
                                     const rl::PpoAgent* lower, const std::vector<std::uint64_t>& seeds,
                                     unsigned threads) {
  if (upper_mode == UpperMode::learned && upper == nullptr) throw ConfigError("learned upper mode needs an agent");
  const bool learned_lower_policy = lower_spec.kind == policy::PolicyKind::learned;
  if (learned_lower_policy && lower == nullptr) throw ConfigError("learned lower policy needs an agent");

  auto one = [&](std::uint64_t s) {
    sim::SgfEnvironment env(env_config, s);
    Rng rng = make_rng(s, streams::upper_policy);
    UpperDecide up = upper_mode == UpperMode::zero_forcing ? zero_forcing_upper()
                     : upper_mode == UpperMode::random     ? random_upper(rng)
                                                           : learned_upper(*upper);
    LowerDecide low = learned_lower_policy ? learned_lower(*lower) : baseline_lower(lower_spec);
    return run_episode(env, 0, up, low);
  };

  std::vector<EpisodeSummary> out(seeds.size());
  threads = std::max(1u, threads);
  for (std::size_t begin = 0; begin < seeds.size(); begin += threads) {
    const std::size_t end = std::min(seeds.size(), begin + threads);
    if (threads == 1) {
      out[begin] = one(seeds[begin]);
      continue;
    }
    std::vector<std::future<EpisodeSummary>> jobs;
    for (std::size_t i = begin; i < end; ++i) jobs.push_back(std::async(std::launch::async, one, seeds[i]));
    for (std::size_t i = begin; i < end; ++i) out[i] = jobs[i - begin].get();
  }
  return out;
}

double mean_of(const std::vector<EpisodeSummary>& runs, double EpisodeSummary::*field) {
  if (runs.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& r : runs) acc += r.*field;
  return acc / static_cast<double>(runs.size());
}

}  // namespace sgf::train
