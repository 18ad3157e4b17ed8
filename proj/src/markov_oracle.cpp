#include "sgf/markov_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>
#include <vector>

#include "sgf/environment.hpp"
#include "sgf/errors.hpp"
#include "sgf/training.hpp"

namespace sgf::oracle {

namespace {

constexpr std::size_t kMaxGfus = 3;

struct State {
  std::array<int, kMaxGfus> ages{1, 1, 1};
  unsigned waiting{0};  // bit i set: GFU i holds an undelivered update
};

std::uint64_t encode(const State& s, std::size_t n) {
  std::uint64_t key = s.waiting;
  for (std::size_t i = 0; i < n; ++i) key = (key << 8) | static_cast<std::uint64_t>(s.ages[i]);
  return key;
}

State decode(std::uint64_t key, std::size_t n) {
  State s;
  for (std::size_t i = n; i-- > 0;) {
    s.ages[i] = static_cast<int>(key & 0xff);
    key >>= 8;
  }
  s.waiting = static_cast<unsigned>(key);
  return s;
}

using Dist = std::unordered_map<std::uint64_t, double>;

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

struct SlotStats {
  double mean_age{0.0};
  double cap_mass{0.0};
};

// Advances the distribution by one slot whose phase is `phase`.
Dist step(const Dist& in, std::int64_t phase, const OracleSpec& spec, SlotStats& stats) {
  const std::size_t n = spec.num_gfus;
  const unsigned all = (1u << n) - 1u;
  Dist out;
  out.reserve(in.size() * 2);
  for (const auto& [key, mass] : in) {
    State s = decode(key, n);
    if (phase == 0) s.waiting = all;
    const auto waiting_count = static_cast<std::size_t>(std::popcount(s.waiting));
    policy::LowerContext ctx{spec.num_levels, n, n - waiting_count};
    const double tp = policy::baseline_tp(spec.policy, ctx);

    // Enumerate attempt subsets of the waiting set.
    for (unsigned attempt = 0; attempt <= all; ++attempt) {
      if ((attempt & ~s.waiting) != 0) continue;
      const auto a = static_cast<std::size_t>(std::popcount(attempt));
      const double p_attempt = std::pow(tp, static_cast<double>(a)) *
                               std::pow(1.0 - tp, static_cast<double>(waiting_count - a));
      if (p_attempt == 0.0) continue;

      auto emit = [&](unsigned winners, double p) {
        State next = s;
        next.waiting = s.waiting & ~winners;
        double age_sum = 0.0;
        bool capped = false;
        for (std::size_t i = 0; i < n; ++i) {
          next.ages[i] = (winners >> i) & 1u ? 1 : std::min(s.ages[i] + 1, spec.age_cap);
          capped = capped || next.ages[i] == spec.age_cap;
          age_sum += next.ages[i];
        }
        const double w = mass * p;
        stats.mean_age += w * age_sum / static_cast<double>(n);
        if (capped) stats.cap_mass += w;
        out[encode(next, n)] += w;
      };

      if (a <= spec.num_levels) {
        emit(attempt, p_attempt);
      } else if (spec.contention == mac::ContentionRule::all_fail) {
        emit(0u, p_attempt);
      } else {
        const double share = p_attempt / binomial(a, spec.num_levels);
        for (unsigned w = attempt;; w = (w - 1) & attempt) {
          if (static_cast<std::size_t>(std::popcount(w)) == spec.num_levels) emit(w, share);
          if (w == 0) break;
        }
      }
    }
  }
  return out;
}

double total_variation(const Dist& a, const Dist& b) {
  double tv = 0.0;
  for (const auto& [k, p] : a) {
    const auto it = b.find(k);
    tv += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [k, p] : b) {
    if (!a.contains(k)) tv += p;
  }
  return 0.5 * tv;
}

}  // namespace

void OracleSpec::validate() const {
  if (num_gfus < 1 || num_gfus > kMaxGfus) throw ConfigError("oracle supports 1 to 3 GFUs");
  if (num_levels < 1) throw ConfigError("oracle needs at least one level");
  if (generation_period < 1) throw ConfigError("generation period must be >= 1");
  if (age_cap < 2 || age_cap > 255) throw ConfigError("age cap must be in [2, 255]");
  if (policy.kind == policy::PolicyKind::learned) throw ConfigError("oracle cannot evaluate a learned policy");
  if (policy.kind == policy::PolicyKind::fixed) (void)policy::fixed_tp(policy.p);
}

OracleResult markov_oracle_expected_aoi(const OracleSpec& spec) {
  spec.validate();
  Dist dist;
  dist[encode(State{{1, 1, 1}, (1u << spec.num_gfus) - 1u}, spec.num_gfus)] = 1.0;

  OracleResult r;
  for (int period = 1; period <= spec.max_periods; ++period) {
    Dist next = dist;
    SlotStats stats;
    for (std::int64_t phase = 0; phase < spec.generation_period; ++phase) {
      next = step(next, phase, spec, stats);
      if (next.size() > spec.max_states) {
        throw ConfigError("oracle state space exceeds " + std::to_string(spec.max_states) + " states");
      }
    }
    const double tv = total_variation(dist, next);
    dist = std::move(next);
    r.periods = period;
    r.states = dist.size();
    r.mean_aoi = stats.mean_age / static_cast<double>(spec.generation_period);
    r.cap_mass = stats.cap_mass / static_cast<double>(spec.generation_period);
    if (tv < spec.tolerance) return r;
  }
  throw NumericalError("oracle distribution did not converge");
}

double transient_mean_aoi(const OracleSpec& spec, std::int64_t horizon) {
  spec.validate();
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  Dist dist;
  dist[encode(State{{1, 1, 1}, (1u << spec.num_gfus) - 1u}, spec.num_gfus)] = 1.0;
  SlotStats stats;
  for (std::int64_t t = 0; t < horizon; ++t) {
    dist = step(dist, t % spec.generation_period, spec, stats);
    if (dist.size() > spec.max_states) {
      throw ConfigError("oracle state space exceeds " + std::to_string(spec.max_states) + " states");
    }
  }
  return stats.mean_age / static_cast<double>(horizon);
}

double single_gfu_expected_aoi(double p, std::int64_t f) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("closed form needs p in (0, 1]");
  const double q = 1.0 - p;
  const double fd = static_cast<double>(f);
  // Delivery lag phi within a period is geometric truncated to [0, f).
  const double s = 1.0 - std::pow(q, fd);
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::int64_t k = 0; k < f; ++k) {
    const double w = p * std::pow(q, static_cast<double>(k)) / s;
    m1 += w * static_cast<double>(k);
    m2 += w * static_cast<double>(k * k);
  }
  const double var_phi = m2 - m1 * m1;
  // Inter-delivery time I = f*G + phi' - phi with G ~ geometric(s) on {1, 2, ...}.
  const double e_i = fd / s;
  const double e_i2 = fd * fd * (2.0 - s) / (s * s) + 2.0 * var_phi;
  return (e_i2 + e_i) / (2.0 * e_i);
}

SimComparison compare_sim_to_oracle(const OracleSpec& spec, std::int64_t slots, std::uint64_t seed) {
  return compare_sim_to_oracle(spec, slots, seed, spec.contention);
}

SimComparison compare_sim_to_oracle(const OracleSpec& spec, std::int64_t slots, std::uint64_t seed,
                                    mac::ContentionRule sim_rule) {
  if (slots < 1) throw ConfigError("slots must be >= 1");
  SimComparison c;
  c.oracle = markov_oracle_expected_aoi(spec).mean_aoi;
  c.slots = slots;

  sim::EnvConfig env;
  env.num_gbus = 1;
  env.num_gfus = spec.num_gfus;
  env.supply = sim::LevelSupply::fixed;
  env.fixed_levels = spec.num_levels;
  env.mac.contention = sim_rule;
  env.gar.generation_period = spec.generation_period;
  env.gar.horizon = slots;
  env.radio.num_antennas = 1;
  env.radio.mobility_std_m = 0.0;
  sim::SgfEnvironment simulator(env, seed);

  // The combiner plays no role under an exogenous level supply.
  const auto v = mac::DetectionMatrix::normalized(Eigen::MatrixXcd::Ones(1, 1));
  constexpr int kBatches = 100;
  const std::int64_t per_batch = std::max<std::int64_t>(1, slots / kBatches);
  std::vector<double> batch_means;
  double batch_acc = 0.0;
  std::int64_t in_batch = 0;
  double total = 0.0;
  train::run_episode(
      simulator, 0, [&](const sim::SgfEnvironment&) { return v; },
      [&](const Eigen::VectorXd&, const policy::LowerContext& ctx) { return policy::baseline_tp(spec.policy, ctx); },
      [&](const sim::SlotRecord& rec) {
        total += rec.mean_age;
        batch_acc += rec.mean_age;
        if (++in_batch == per_batch) {
          batch_means.push_back(batch_acc / static_cast<double>(per_batch));
          batch_acc = 0.0;
          in_batch = 0;
        }
      });
  c.simulated = total / static_cast<double>(slots);
  c.relative_deviation = std::abs(c.simulated - c.oracle) / c.oracle;
  if (batch_means.size() > 1) {
    double mean = 0.0;
    for (double b : batch_means) mean += b;
    mean /= static_cast<double>(batch_means.size());
    double var = 0.0;
    for (double b : batch_means) var += (b - mean) * (b - mean);
    var /= static_cast<double>(batch_means.size() - 1);
    c.standard_error = std::sqrt(var / static_cast<double>(batch_means.size()));
  }
  return c;
}

}  // namespace sgf::oracle
