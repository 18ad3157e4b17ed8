#include "sgf/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include "sgf/checkpoint.hpp"
#include "sgf/errors.hpp"
#include "sgf/markov_oracle.hpp"
#include "sgf/svg_plot.hpp"
#include "sgf/training.hpp"

namespace sgf::harness {

namespace fs = std::filesystem;

namespace {

std::string g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  return out;
}

fs::path prepare_dir(Mode mode, const ExperimentConfig& c) {
  const std::string id = c.run_id.empty() ? to_string(mode) + "-seed" + std::to_string(c.seed) : c.run_id;
  const fs::path dir = fs::path(c.output_dir) / id;
  std::error_code ec;
  fs::create_directories(dir / "checkpoints", ec);
  if (!ec) fs::create_directories(dir / "plots", ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  open_out(dir / "config.echo") << echo_config(c);
  return dir;
}

std::string metrics_row(const train::EpisodeMetrics& m) {
  return std::to_string(m.episode) + "," + g(m.mean_aoi) + "," + g(m.throughput) + "," + g(m.upper_loss) + "," +
         g(m.lower_loss) + "," + g(m.clip_fraction) + "\n";
}

void write_learning_plots(const fs::path& dir, const std::vector<train::EpisodeMetrics>& log) {
  plot::Series aoi{"mean AoI", {}, {}};
  plot::Series thr{"throughput", {}, {}};
  for (const auto& m : log) {
    aoi.x.push_back(m.episode);
    aoi.y.push_back(m.mean_aoi);
    thr.x.push_back(m.episode);
    thr.y.push_back(m.throughput);
  }
  constexpr std::size_t kWindow = 100;
  plot::Series aoi_avg{"100-episode average", aoi.x, plot::moving_average(aoi.y, kWindow)};
  plot::Series thr_avg{"100-episode average", thr.x, plot::moving_average(thr.y, kWindow)};
  plot::write_svg({"Average AoI per episode", "episode", "slots", {aoi, aoi_avg}}, (dir / "plots" / "aoi.svg").string());
  plot::write_svg({"Throughput per episode", "episode", "bits/s/Hz per slot", {thr, thr_avg}},
                  (dir / "plots" / "throughput.svg").string());
}

train::UpperMode upper_mode_of(const std::string& upper) {
  if (upper == "zf") return train::UpperMode::zero_forcing;
  if (upper == "random") return train::UpperMode::random;
  return train::UpperMode::learned;
}

struct LoadedAgents {
  std::optional<rl::PpoAgent> lower;
  std::optional<rl::PpoAgent> upper;
};

LoadedAgents load_agents(const ExperimentConfig& c, const policy::PolicySpec& lower_spec) {
  LoadedAgents a;
  if (lower_spec.kind == policy::PolicyKind::learned) {
    a.lower = ckpt::load(lower_spec.checkpoint, train::lower_spaces(c.env), std::nullopt, c.ppo.hidden_units).lower;
  }
  if (upper_mode_of(c.upper) == train::UpperMode::learned) {
    const std::string path = c.upper.substr(std::string("learned:").size());
    a.upper = ckpt::load(path, std::nullopt, train::upper_spaces(c.env), c.ppo.hidden_units).upper;
  }
  return a;
}

// Evaluates on every eval seed; slots.csv records the first seed's trace.
std::vector<train::EpisodeSummary> evaluate_and_trace(const ExperimentConfig& c, const fs::path& dir,
                                                      train::UpperMode upper_mode, const rl::PpoAgent* upper,
                                                      const policy::PolicySpec& lower_spec,
                                                      const rl::PpoAgent* lower) {
  auto runs = train::evaluate(c.env, upper_mode, upper, lower_spec, lower, c.eval_seeds, c.threads);
  if (c.write_slots) {
    sim::SgfEnvironment env(c.env, c.eval_seeds.front());
    Rng rng = make_rng(c.eval_seeds.front(), streams::upper_policy);
    auto up = upper_mode == train::UpperMode::zero_forcing ? train::zero_forcing_upper()
              : upper_mode == train::UpperMode::random     ? train::random_upper(rng)
                                                           : train::learned_upper(*upper);
    auto low = lower ? train::learned_lower(*lower) : train::baseline_lower(lower_spec);
    auto out = open_out(dir / "slots.csv");
    out << slots_csv_header();
    train::run_episode(env, 0, up, low, [&](const sim::SlotRecord& r) { out << slots_csv_row(r); });
  }
  return runs;
}

void write_eval_table(const fs::path& path, const std::string& policy_label, const std::string& upper_label,
                      const std::vector<std::uint64_t>& seeds, const std::vector<train::EpisodeSummary>& runs,
                      bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  if (!append) out << "policy,upper,seed,mean_aoi,throughput,gbu_throughput,gfu_throughput,successes,collisions\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    out << policy_label << ',' << upper_label << ',' << seeds[i] << ',' << g(r.mean_aoi) << ',' << g(r.throughput)
        << ',' << g(r.gbu_throughput) << ',' << g(r.gfu_throughput) << ',' << r.successes << ',' << r.collisions
        << '\n';
  }
}

std::string summary_line(const std::string& label, const std::vector<train::EpisodeSummary>& runs) {
  return label + ": mean AoI " + g(train::mean_of(runs, &train::EpisodeSummary::mean_aoi)) + " slots, throughput " +
         g(train::mean_of(runs, &train::EpisodeSummary::throughput)) + " bits/s/Hz";
}

RunReport run_training(Mode mode, const ExperimentConfig& c, const fs::path& dir) {
  RunReport rep{dir.string(), {}};
  auto metrics = open_out(dir / "metrics.csv");
  metrics << metrics_csv_header();
  auto sink = [&](const train::EpisodeMetrics& m) { metrics << metrics_row(m); };
  const bool hier = mode == Mode::train_hier;
  auto result = hier ? train::train_hierarchical(c.env, c.ppo, c.episodes, c.seed, sink)
                     : train::train_lower(c.env, c.ppo, c.episodes, c.seed, sink);
  metrics.close();
  write_learning_plots(dir, result.log);

  ckpt::Bundle bundle;
  bundle.lower = result.lower;
  bundle.upper = result.upper;
  bundle.config_hash = config_hash(c);
  ckpt::save(bundle, (dir / "checkpoints" / "final.json").string());

  const auto learned = policy::PolicySpec::parse("learned:" + (dir / "checkpoints" / "final.json").string());
  const auto upper_mode = hier ? train::UpperMode::learned : train::UpperMode::zero_forcing;
  const rl::PpoAgent* upper = result.upper ? &*result.upper : nullptr;
  auto runs = evaluate_and_trace(c, dir, upper_mode, upper, learned, &result.lower);
  write_eval_table(dir / "eval.csv", "learned", hier ? "learned" : "zf", c.eval_seeds, runs, false);

  double tail = 0.0;
  const std::size_t n = std::min<std::size_t>(100, result.log.size());
  for (std::size_t i = result.log.size() - n; i < result.log.size(); ++i) tail += result.log[i].mean_aoi;
  if (n > 0) rep.summary.push_back("final " + std::to_string(n) + "-episode training mean AoI " + g(tail / n));
  rep.summary.push_back(summary_line("held-out evaluation", runs));
  return rep;
}

RunReport run_eval(const ExperimentConfig& c, const fs::path& dir) {
  const auto spec = policy::PolicySpec::parse(c.policy);
  auto agents = load_agents(c, spec);
  const auto upper_mode = upper_mode_of(c.upper);
  auto runs = evaluate_and_trace(c, dir, upper_mode, agents.upper ? &*agents.upper : nullptr, spec,
                                 agents.lower ? &*agents.lower : nullptr);
  write_eval_table(dir / "eval.csv", spec.to_string(), c.upper, c.eval_seeds, runs, false);
  // One metrics row per evaluated seed, without training losses.
  auto metrics = open_out(dir / "metrics.csv");
  metrics << metrics_csv_header();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    metrics << metrics_row({static_cast<int>(i), runs[i].mean_aoi, runs[i].throughput, 0.0, 0.0, 0.0});
  }
  return {dir.string(), {summary_line(spec.to_string() + " / " + c.upper, runs)}};
}

RunReport run_sweep(const ExperimentConfig& c, const fs::path& dir) {
  RunReport rep{dir.string(), {}};
  const auto upper_mode = upper_mode_of(c.upper);
  auto agents = load_agents(c, policy::PolicySpec::parse("adaptive"));
  bool first = true;
  for (const auto& text : c.sweep_policies) {
    const auto spec = policy::PolicySpec::parse(text);
    auto runs = train::evaluate(c.env, upper_mode, agents.upper ? &*agents.upper : nullptr, spec, nullptr,
                                c.eval_seeds, c.threads);
    write_eval_table(dir / "sweep.csv", spec.to_string(), c.upper, c.eval_seeds, runs, !first);
    first = false;
    rep.summary.push_back(summary_line(spec.to_string(), runs));
  }
  return rep;
}

RunReport run_oracle(const ExperimentConfig& c, const fs::path& dir) {
  oracle::OracleSpec spec;
  spec.num_gfus = c.oracle.num_gfus;
  spec.num_levels = c.oracle.num_levels;
  spec.policy = policy::PolicySpec::parse(c.oracle.policy);
  spec.generation_period = c.env.gar.generation_period;
  spec.contention = c.env.mac.contention;
  spec.age_cap = c.oracle.age_cap;
  const auto exact = oracle::markov_oracle_expected_aoi(spec);
  const auto cmp = oracle::compare_sim_to_oracle(spec, c.oracle.slots, c.seed);
  auto out = open_out(dir / "oracle.csv");
  out << "num_gfus,num_levels,policy,generation_period,contention,oracle_aoi,simulated_aoi,relative_deviation,"
         "standard_error,slots,states,cap_mass\n";
  out << spec.num_gfus << ',' << spec.num_levels << ',' << spec.policy.to_string() << ',' << spec.generation_period
      << ',' << mac::to_string(spec.contention) << ',' << g(exact.mean_aoi) << ',' << g(cmp.simulated) << ','
      << g(cmp.relative_deviation) << ',' << g(cmp.standard_error) << ',' << cmp.slots << ',' << exact.states << ','
      << g(exact.cap_mass) << '\n';
  return {dir.string(),
          {"oracle mean AoI " + g(exact.mean_aoi) + ", simulated " + g(cmp.simulated) + " (relative deviation " +
           g(cmp.relative_deviation) + ", standard error " + g(cmp.standard_error) + ")"}};
}

RunReport run_scale(const ExperimentConfig& c, const fs::path& dir) {
  RunReport rep{dir.string(), {}};
  auto table = open_out(dir / "scale.csv");
  table << "num_gfus,mean_aoi,throughput,gbu_throughput,gfu_throughput,gain_vs_first\n";
  auto metrics = open_out(dir / "metrics.csv");
  metrics << "num_gfus," << metrics_csv_header();
  plot::Series thr{"trained system", {}, {}};
  double first_thr = 0.0;
  for (std::size_t k : c.scale_gfus) {
    ExperimentConfig ck = c;
    ck.env.num_gfus = k;
    auto result = train::train_hierarchical(ck.env, ck.ppo, ck.episodes, ck.seed, [&](const train::EpisodeMetrics& m) {
      metrics << k << ',' << metrics_row(m);
    });
    ckpt::Bundle bundle;
    bundle.lower = result.lower;
    bundle.upper = result.upper;
    bundle.config_hash = config_hash(ck);
    ckpt::save(bundle, (dir / "checkpoints" / ("gfus" + std::to_string(k) + ".json")).string());
    const auto runs = train::evaluate(ck.env, train::UpperMode::learned, &*result.upper,
                                      policy::PolicySpec::parse("learned:-"), &result.lower, ck.eval_seeds,
                                      ck.threads);
    const double t = train::mean_of(runs, &train::EpisodeSummary::throughput);
    if (thr.x.empty()) first_thr = t;
    const double gain = first_thr > 0.0 ? t / first_thr - 1.0 : 0.0;
    table << k << ',' << g(train::mean_of(runs, &train::EpisodeSummary::mean_aoi)) << ',' << g(t) << ','
          << g(train::mean_of(runs, &train::EpisodeSummary::gbu_throughput)) << ','
          << g(train::mean_of(runs, &train::EpisodeSummary::gfu_throughput)) << ',' << g(gain) << '\n';
    thr.x.push_back(static_cast<double>(k));
    thr.y.push_back(t);
    rep.summary.push_back("K'=" + std::to_string(k) + ": throughput " + g(t) + " (gain " + g(100.0 * gain) + "%)");
  }
  plot::write_svg({"Throughput versus number of GFUs", "GFUs", "bits/s/Hz per slot", {thr}},
                  (dir / "plots" / "scale.svg").string());
  return rep;
}

}  // namespace

Mode parse_mode(const std::string& text) {
  if (text == "train-lower") return Mode::train_lower;
  if (text == "train-hier") return Mode::train_hier;
  if (text == "eval") return Mode::eval;
  if (text == "sweep" || text == "baseline-sweep") return Mode::sweep;
  if (text == "oracle" || text == "oracle-check") return Mode::oracle;
  if (text == "scale" || text == "scale-study") return Mode::scale;
  throw ConfigError("unknown mode '" + text + "'");
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::train_lower: return "train-lower";
    case Mode::train_hier: return "train-hier";
    case Mode::eval: return "eval";
    case Mode::sweep: return "sweep";
    case Mode::oracle: return "oracle";
    case Mode::scale: return "scale";
  }
  return "unknown";
}

std::string slots_csv_header() {
  return "slot,n_levels,n_attempts,n_success,collision,sum_gbu_rate,sum_gfu_rate,mean_age,max_age,n_waiting\n";
}

std::string slots_csv_row(const sim::SlotRecord& r) {
  return std::to_string(r.slot) + "," + std::to_string(r.n_levels) + "," + std::to_string(r.n_attempts) + "," +
         std::to_string(r.n_success) + "," + (r.collision ? "1" : "0") + "," + g(r.sum_gbu_rate) + "," +
         g(r.sum_gfu_rate) + "," + g(r.mean_age) + "," + std::to_string(r.max_age) + "," +
         std::to_string(r.n_waiting) + "\n";
}

std::string metrics_csv_header() { return "episode,mean_aoi,throughput,upper_loss,lower_loss,clip_fraction\n"; }

RunReport run(Mode mode, const ExperimentConfig& config) {
  config.validate();
  const fs::path dir = prepare_dir(mode, config);
  switch (mode) {
    case Mode::train_lower:
    case Mode::train_hier: return run_training(mode, config, dir);
    case Mode::eval: return run_eval(config, dir);
    case Mode::sweep: return run_sweep(config, dir);
    case Mode::oracle: return run_oracle(config, dir);
    case Mode::scale: return run_scale(config, dir);
  }
  throw ConfigError("unhandled mode");
}

}  // namespace sgf::harness
