// Acceptance runner: one PASS/FAIL line per criterion.
// Usage: sgf_acceptance [criterion...]   (no arguments runs all eight)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "sgf/channel.hpp"
#include "sgf/environment.hpp"
#include "sgf/mac.hpp"
#include "sgf/markov_oracle.hpp"
#include "sgf/training.hpp"
#include "support/gradient_check.hpp"

using namespace sgf;

namespace {

// Pinned tolerances and run sizes.
constexpr double kOracleRelTol = 0.01;
constexpr std::int64_t kOracleSlots = 1000000;
constexpr double kOracleSpecSeconds = 60.0;
constexpr double kCascadeTol = 1e-12;
constexpr double kNullingTol = 1e-9;
constexpr int kNullingSnapshots = 1000;
constexpr double kGradientTol = 1e-4;
constexpr int kGradientInstances = 100;
constexpr int kEpisodes = 6000;
constexpr double kLowerFinalAoi = 3.0;
constexpr double kHierAoi = 2.0;
constexpr double kHierThroughputRatio = 1.15;
constexpr double kScaleGain = 0.25;
constexpr std::int64_t kFuzzSlots = 100000;

struct Verdict {
  bool pass{false};
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<std::uint64_t> eval_seeds() {
  std::vector<std::uint64_t> s(10);
  std::iota(s.begin(), s.end(), 1000);
  return s;
}

double final_mean_aoi(const train::TrainResult& r, std::size_t window) {
  const std::size_t n = std::min(window, r.log.size());
  double acc = 0.0;
  for (std::size_t i = r.log.size() - n; i < r.log.size(); ++i) acc += r.log[i].mean_aoi;
  return n ? acc / static_cast<double>(n) : 0.0;
}

rl::PpoConfig learning_ppo() {
  rl::PpoConfig p;
  p.reward_scale = 0.01;
  p.lower_update_period = 2048;
  return p;
}

// Physical cell used by the hierarchical and scale criteria.
sim::EnvConfig hierarchical_env() {
  sim::EnvConfig e;
  e.radio.gfu_max_snr_db = 143.0;
  e.upper_action = sim::UpperAction::zf_residual;
  return e;
}

Verdict oracle_equivalence() {
  Verdict v{true, ""};
  double worst = 0.0, slowest = 0.0;
  for (std::size_t k : {1, 2}) {
    for (std::size_t n : {1, 2}) {
      for (const char* pol : {"fixed:0.5", "state-dependent"}) {
        oracle::OracleSpec spec;
        spec.num_gfus = k;
        spec.num_levels = n;
        spec.policy = policy::PolicySpec::parse(pol);
        spec.generation_period = 3;
        const auto t0 = std::chrono::steady_clock::now();
        const auto cmp = oracle::compare_sim_to_oracle(spec, kOracleSlots, 7 + k * 10 + n);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        worst = std::max(worst, cmp.relative_deviation);
        slowest = std::max(slowest, secs);
        if (cmp.relative_deviation >= kOracleRelTol || secs >= kOracleSpecSeconds) v.pass = false;
        std::printf("  K'=%zu N=%zu %-16s oracle %.5f sim %.5f rel %.2e (%.1fs)\n", k, n, pol, cmp.oracle,
                    cmp.simulated, cmp.relative_deviation, secs);
      }
    }
  }
  v.detail = "worst relative deviation " + fmt("%.2e", worst) + " (< 1e-2), slowest spec " + fmt("%.1f", slowest) + "s";
  return v;
}

Verdict cascade_identities() {
  double worst = 0.0;
  for (double rate : {0.5, 1.0, 2.0}) {
    const double eps = std::exp2(rate) - 1.0;
    for (std::size_t n = 1; n <= 6; ++n) {
      const auto lit = mac::configure_snr_levels(rate, 1e30, 1.0, mac::CascadeMode::paper_literal, n);
      if (lit.size() != n) return {false, "paper-literal cascade has the wrong length"};
      worst = std::max(worst, std::abs(lit.back() - eps));
      for (std::size_t i = 0; i + 1 < n; ++i) worst = std::max(worst, std::abs(lit[i] / (1.0 + lit[i + 1]) - eps));

      const auto full = mac::configure_snr_levels(rate, 1e30, 1.0, mac::CascadeMode::full_sum, n);
      if (full.size() != n) return {false, "full-sum cascade has the wrong length"};
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        const double later = std::accumulate(full.begin() + static_cast<long>(i) + 1, full.end(), 0.0);
        worst = std::max(worst, std::abs(full[i] / (1.0 + later) - eps));
        worst = std::max(worst, std::abs(mac::gfu_rate(i, full, all) - rate));
      }
    }
  }
  return {worst < kCascadeTol, "worst identity residual " + fmt("%.2e", worst) + " (< 1e-12)"};
}

Verdict zf_nulling() {
  channel::RadioConfig rc;
  const auto params = rc.linear();
  Rng rng = make_rng(31, streams::fading);
  double worst = 0.0;
  for (int s = 0; s < kNullingSnapshots; ++s) {
    const auto gbus = channel::place_users(3, params.placement_std_km, params.d_min_km, rng);
    const auto snap = channel::sample_snapshot(gbus, {}, params, s, rng);
    const auto v = mac::DetectionMatrix::zero_forcing(snap.gbu_channels);
    for (std::size_t k = 0; k < 3; ++k) {
      const double ratio =
          mac::gb_interference(k, snap, v, params) / (params.gbu_power_w * snap.gbu_channels[k].squaredNorm());
      worst = std::max(worst, ratio);
    }
  }
  return {worst < kNullingTol, "worst I_GB/(P|h|^2) " + fmt("%.2e", worst) + " over 1000 snapshots (< 1e-9)"};
}

Verdict gradient_checks() {
  double clip = 0.0, critic = 0.0;
  for (int i = 0; i < kGradientInstances; ++i) {
    const auto squash = i % 2 ? rl::Squash::identity : rl::Squash::sigmoid;
    const auto g = testing::make_gradient_instance(static_cast<std::uint64_t>(500 + i), squash);
    clip = std::max(clip, testing::clip_loss_gradient_error(g));
    critic = std::max(critic, testing::critic_loss_gradient_error(g));
  }
  return {clip < kGradientTol && critic < kGradientTol,
          "worst relative error clip " + fmt("%.2e", clip) + ", critic " + fmt("%.2e", critic) + " (< 1e-4)"};
}

Verdict lower_learning() {
  sim::EnvConfig env;
  env.supply = sim::LevelSupply::fixed;
  env.fixed_levels = 3;
  const auto res = train::train_lower(env, learning_ppo(), kEpisodes, 1);
  const double final100 = final_mean_aoi(res, 100);
  const auto seeds = eval_seeds();
  auto eval = [&](const char* pol, const rl::PpoAgent* agent) {
    return train::mean_of(train::evaluate(env, train::UpperMode::zero_forcing, nullptr,
                                          policy::PolicySpec::parse(pol), agent, seeds),
                          &train::EpisodeSummary::mean_aoi);
  };
  const double learned = eval("learned:acceptance", &res.lower);
  const double adaptive = eval("adaptive", nullptr);
  const double state_dep = eval("state-dependent", nullptr);
  const bool pass = final100 < kLowerFinalAoi && learned <= adaptive && learned <= state_dep;
  return {pass, "final100 AoI " + fmt("%.3f", final100) + " (< 3); eval AoI learned " + fmt("%.3f", learned) +
                    ", adaptive " + fmt("%.3f", adaptive) + ", state-dependent " + fmt("%.3f", state_dep)};
}

Verdict hierarchical_learning() {
  const auto env = hierarchical_env();
  const auto ppo = learning_ppo();
  const auto hier = train::train_hierarchical(env, ppo, kEpisodes, 1);
  const auto zf_lower = train::train_lower(env, ppo, kEpisodes, 1);
  const auto seeds = eval_seeds();
  const auto learned = train::evaluate(env, train::UpperMode::learned, &*hier.upper,
                                       policy::PolicySpec::parse("learned:acceptance"), &hier.lower, seeds);
  const auto zf = train::evaluate(env, train::UpperMode::zero_forcing, nullptr,
                                  policy::PolicySpec::parse("learned:acceptance"), &zf_lower.lower, seeds);
  const double aoi = train::mean_of(learned, &train::EpisodeSummary::mean_aoi);
  const double thr = train::mean_of(learned, &train::EpisodeSummary::throughput);
  const double zf_aoi = train::mean_of(zf, &train::EpisodeSummary::mean_aoi);
  const double zf_thr = train::mean_of(zf, &train::EpisodeSummary::throughput);
  const double ratio = thr / zf_thr;
  return {aoi <= kHierAoi && ratio >= kHierThroughputRatio,
          "learned AoI " + fmt("%.3f", aoi) + " (<= 2.0), throughput " + fmt("%.3f", thr) + " vs ZF+learned-lower " +
              fmt("%.3f", zf_thr) + " (AoI " + fmt("%.3f", zf_aoi) + "): ratio " + fmt("%.3f", ratio) + " (>= 1.15)"};
}

Verdict scale_study() {
  auto env = hierarchical_env();
  env.mac.full_budget_charge = true;
  const auto ppo = learning_ppo();
  std::vector<double> thr;
  std::string detail = "throughput by K':";
  for (std::size_t k : {3, 6, 9, 12, 15}) {
    env.num_gfus = k;
    const auto res = train::train_hierarchical(env, ppo, kEpisodes, 1);
    const auto runs = train::evaluate(env, train::UpperMode::learned, &*res.upper,
                                      policy::PolicySpec::parse("learned:acceptance"), &res.lower, eval_seeds());
    thr.push_back(train::mean_of(runs, &train::EpisodeSummary::throughput));
    std::printf("  K'=%zu throughput %.4f AoI %.3f\n", k, thr.back(), train::mean_of(runs, &train::EpisodeSummary::mean_aoi));
    detail += " " + fmt("%.3f", thr.back());
  }
  bool monotone = true;
  for (std::size_t i = 1; i < thr.size(); ++i) monotone = monotone && thr[i] >= thr[i - 1];
  const double gain = thr.back() / thr.front() - 1.0;
  detail += std::string("; nondecreasing ") + (monotone ? "yes" : "no") + ", gain " + fmt("%.1f", 100.0 * gain) +
            "% (>= 25%)";
  return {monotone && gain >= kScaleGain, detail};
}

Verdict mechanics() {
  std::string why;
  // Never transmitting: no GF throughput, ages climb by one per slot, and the
  // age of the pending update is a sawtooth with the generation period.
  {
    sim::EnvConfig cfg;
    cfg.gar.horizon = 60;
    sim::SgfEnvironment env(cfg, 3);
    const std::int64_t f = cfg.gar.generation_period;
    double prev_mean = 1.0;
    train::run_episode(env, 0, train::zero_forcing_upper(), train::baseline_lower(policy::PolicySpec::parse("fixed:0")),
                       [&](const sim::SlotRecord& r) {
                         if (r.sum_gfu_rate != 0.0 || r.n_attempts != 0) why = "GF traffic under never-transmit";
                         if (r.mean_age != prev_mean + 1.0) why = "age did not grow by one slot";
                         prev_mean = r.mean_age;
                         for (const auto& s : env.aoi_states()) {
                           if (r.slot - s.generation_time != r.slot % f) why = "pending age is not a period-f sawtooth";
                         }
                       });
  }
  // Overload, budget clamp and action ranges on a long fuzz run with
  // untrained agents sampling both actions.
  sim::EnvConfig cfg;
  sim::SgfEnvironment env(cfg, 9);
  rl::PpoAgent lower(train::lower_spaces(cfg), {}, 1);
  rl::PpoAgent upper(train::upper_spaces(cfg), {}, 2);
  Rng rng(10);
  std::int64_t slots = 0, overloads = 0;
  for (std::uint64_t ep = 0; slots < kFuzzSlots; ++ep) {
    env.reset(ep);
    while (!env.done() && slots < kFuzzSlots) {
      const auto v = train::detection_from_action(upper.act(env.upper_state(), rng).raw, env);
      for (std::size_t k = 0; k < v.num_gbus(); ++k) {
        if (std::abs(v.column(k).norm() - 1.0) > 1e-12) why = "combiner column not unit norm";
      }
      env.begin_slot(v);
      const auto& b = env.budget();
      for (std::size_t k = 0; k < cfg.num_gbus; ++k) {
        if (!(b.per_gbu_gf[k] >= 0.0)) why = "negative interference budget";
        const auto& row = env.plan().per_gbu_levels[k];
        const double sum = std::accumulate(row.begin(), row.end(), 0.0);
        if (sum * env.radio().noise_power_w > b.per_gbu_gf[k] * (1.0 + 1e-12)) why = "levels exceed the budget";
      }
      const double tp = lower.act(env.lower_state(), rng).action(0);
      if (!(tp >= 0.0 && tp <= 1.0)) why = "transmission probability outside [0, 1]";
      const auto rec = env.finish_slot(tp);
      if (rec.n_attempts > rec.n_levels) {
        ++overloads;
        if (rec.n_success != 0) why = "success on an overloaded slot";
      }
      ++slots;
    }
  }
  if (overloads == 0) why = "fuzz never overloaded the levels";
  return {why.empty(), why.empty() ? "never-transmit, overload (" + std::to_string(overloads) +
                                         " slots) and 1e5-slot invariant fuzz all hold"
                                   : why};
}

struct Criterion {
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"oracle equivalence", oracle_equivalence},   {"cascade identities", cascade_identities},
      {"zero-forcing nulling", zf_nulling},         {"gradient checks", gradient_checks},
      {"lower-level learning", lower_learning},     {"hierarchical learning", hierarchical_learning},
      {"scale-study monotonicity", scale_study},    {"mechanics properties", mechanics},
  };
  std::vector<int> chosen;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
      return 2;
    }
    chosen.push_back(n);
  }
  if (chosen.empty()) {
    for (int n = 1; n <= static_cast<int>(criteria.size()); ++n) chosen.push_back(n);
  }
  bool all = true;
  for (int n : chosen) {
    const auto& c = criteria[static_cast<std::size_t>(n - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    const Verdict v = c.run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d (%s): %s  %s [%.1fs]\n", n, c.name, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
