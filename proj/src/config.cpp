#include "sgf/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "sgf/baselines.hpp"
#include "sgf/errors.hpp"

namespace sgf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

template <typename T, typename Conv>
std::vector<T> to_list(const std::string& key, const std::string& v, Conv conv) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(conv(key, item));
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, std::string>) {
      out += xs[i];
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define SGF_DOUBLE(name, member)                                                             \
  Field {                                                                                    \
    name, [](ExperimentConfig& c, const std::string& v) { c.member = to_double(name, v); }, \
        [](const ExperimentConfig& c) { return fmt(c.member); }                              \
  }
#define SGF_INT(name, member, type)                                                                  \
  Field {                                                                                            \
    name, [](ExperimentConfig& c, const std::string& v) { c.member = to_int<type>(name, v); },      \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }                           \
  }
#define SGF_BOOL(name, member)                                                             \
  Field {                                                                                  \
    name, [](ExperimentConfig& c, const std::string& v) { c.member = to_bool(name, v); }, \
        [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); } \
  }
#define SGF_STRING(name, member)                                                \
  Field {                                                                       \
    name, [](ExperimentConfig& c, const std::string& v) { c.member = v; },     \
        [](const ExperimentConfig& c) { return c.member; }                      \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      SGF_INT("antennas", env.radio.num_antennas, int),
      SGF_DOUBLE("rician_factor", env.radio.rician_factor),
      SGF_DOUBLE("noise_dbm", env.radio.noise_dbm),
      SGF_DOUBLE("gbu_power_dbm", env.radio.gbu_power_dbm),
      SGF_DOUBLE("gfu_max_snr_db", env.radio.gfu_max_snr_db),
      SGF_DOUBLE("bandwidth_hz", env.radio.bandwidth_hz),
      SGF_DOUBLE("target_rate", env.radio.target_rate),
      SGF_DOUBLE("placement_std_km", env.radio.placement_std_km),
      SGF_DOUBLE("mobility_std_m", env.radio.mobility_std_m),
      SGF_DOUBLE("pathloss_alpha", env.radio.pathloss_alpha),
      SGF_DOUBLE("pathloss_ref_db", env.radio.pathloss_ref_db),
      SGF_DOUBLE("d_min_m", env.radio.d_min_m),
      Field{"cascade_mode",
            [](ExperimentConfig& c, const std::string& v) { c.env.mac.cascade_mode = mac::parse_cascade_mode(v); },
            [](const ExperimentConfig& c) { return mac::to_string(c.env.mac.cascade_mode); }},
      SGF_BOOL("full_budget_charge", env.mac.full_budget_charge),
      Field{"contention",
            [](ExperimentConfig& c, const std::string& v) { c.env.mac.contention = mac::parse_contention_rule(v); },
            [](const ExperimentConfig& c) { return mac::to_string(c.env.mac.contention); }},
      SGF_INT("max_levels", env.mac.max_levels_per_gbu, std::size_t),
      SGF_INT("num_gbus", env.num_gbus, std::size_t),
      SGF_INT("num_gfus", env.num_gfus, std::size_t),
      SGF_INT("generation_period", env.gar.generation_period, std::int64_t),
      SGF_INT("horizon", env.gar.horizon, std::int64_t),
      Field{"level_supply",
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "physical") {
                c.env.supply = sim::LevelSupply::physical;
              } else if (v == "fixed") {
                c.env.supply = sim::LevelSupply::fixed;
              } else {
                throw ConfigError("level_supply must be physical or fixed, got '" + v + "'");
              }
            },
            [](const ExperimentConfig& c) {
              return std::string(c.env.supply == sim::LevelSupply::physical ? "physical" : "fixed");
            }},
      SGF_INT("fixed_levels", env.fixed_levels, std::size_t),
      Field{"upper_action",
            [](ExperimentConfig& c, const std::string& v) {
              if (v == "direct") {
                c.env.upper_action = sim::UpperAction::direct;
              } else if (v == "zf_residual") {
                c.env.upper_action = sim::UpperAction::zf_residual;
              } else {
                throw ConfigError("upper_action must be direct or zf_residual, got '" + v + "'");
              }
            },
            [](const ExperimentConfig& c) {
              return std::string(c.env.upper_action == sim::UpperAction::direct ? "direct" : "zf_residual");
            }},
      SGF_DOUBLE("clip_ratio", ppo.clip_ratio),
      SGF_DOUBLE("discount", ppo.discount),
      SGF_DOUBLE("actor_lr", ppo.actor_lr),
      SGF_DOUBLE("critic_lr", ppo.critic_lr),
      SGF_INT("epochs", ppo.epochs, int),
      SGF_INT("lower_update_period", ppo.lower_update_period, int),
      SGF_INT("upper_update_period", ppo.upper_update_period, int),
      SGF_INT("batch_capacity", ppo.batch_capacity, std::size_t),
      SGF_INT("minibatch_size", ppo.minibatch_size, std::size_t),
      SGF_INT("hidden_units", ppo.hidden_units, int),
      SGF_DOUBLE("log_std_init", ppo.log_std_init),
      SGF_DOUBLE("log_std_floor", ppo.log_std_floor),
      SGF_BOOL("normalize_advantages", ppo.normalize_advantages),
      SGF_DOUBLE("penalty_lambda", ppo.penalty_lambda),
      SGF_DOUBLE("reward_scale", ppo.reward_scale),
      SGF_STRING("policy", policy),
      SGF_STRING("upper", upper),
      SGF_INT("episodes", episodes, int),
      Field{"eval_seeds",
            [](ExperimentConfig& c, const std::string& v) {
              c.eval_seeds = to_list<std::uint64_t>("eval_seeds", v, to_int<std::uint64_t>);
            },
            [](const ExperimentConfig& c) { return join(c.eval_seeds); }},
      SGF_INT("seed", seed, std::uint64_t),
      SGF_STRING("output_dir", output_dir),
      SGF_STRING("run_id", run_id),
      SGF_INT("threads", threads, unsigned),
      Field{"sweep_policies",
            [](ExperimentConfig& c, const std::string& v) {
              c.sweep_policies = to_list<std::string>("sweep_policies", v,
                                                      [](const std::string&, const std::string& s) { return s; });
            },
            [](const ExperimentConfig& c) { return join(c.sweep_policies); }},
      Field{"scale_gfus",
            [](ExperimentConfig& c, const std::string& v) {
              c.scale_gfus = to_list<std::size_t>("scale_gfus", v, to_int<std::size_t>);
            },
            [](const ExperimentConfig& c) { return join(c.scale_gfus); }},
      SGF_BOOL("write_slots", write_slots),
      SGF_INT("oracle_gfus", oracle.num_gfus, std::size_t),
      SGF_INT("oracle_levels", oracle.num_levels, std::size_t),
      SGF_STRING("oracle_policy", oracle.policy),
      SGF_INT("oracle_slots", oracle.slots, std::int64_t),
      SGF_INT("oracle_age_cap", oracle.age_cap, int),
  };
  return table;
}

#undef SGF_DOUBLE
#undef SGF_INT
#undef SGF_BOOL
#undef SGF_STRING

bool writable_dir_name(const std::string& path) { return !path.empty() && path.find('\0') == std::string::npos; }

}  // namespace

void ExperimentConfig::validate() const {
  env.validate();
  ppo.validate();
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  if (eval_seeds.empty()) throw ConfigError("eval_seeds must list at least one seed");
  if (!writable_dir_name(output_dir)) throw ConfigError("output_dir must be a non-empty path");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (env.supply == sim::LevelSupply::fixed && env.fixed_levels < 1) throw ConfigError("fixed_levels must be >= 1");
  (void)policy::PolicySpec::parse(policy);
  for (const auto& p : sweep_policies) {
    if (policy::PolicySpec::parse(p).kind == policy::PolicyKind::learned) {
      throw ConfigError("sweep_policies accepts baseline policies only");
    }
  }
  if (upper != "zf" && upper != "random" && upper.rfind("learned:", 0) != 0) {
    throw ConfigError("upper must be zf, random or learned:<checkpoint>");
  }
  for (std::size_t k : scale_gfus) {
    if (k < 1) throw ConfigError("scale_gfus entries must be >= 1");
  }
  if (oracle.num_gfus < 1 || oracle.num_gfus > 3) throw ConfigError("oracle_gfus must be in [1, 3]");
  if (oracle.num_levels < 1) throw ConfigError("oracle_levels must be >= 1");
  if (oracle.slots < 1) throw ConfigError("oracle_slots must be >= 1");
  if (oracle.age_cap < 2) throw ConfigError("oracle_age_cap must be >= 2");
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  set_config_value(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    try {
      apply_override(base, line);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

std::string echo_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += '=';
    out += f.get(config);
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  // Where a run writes and how many workers it uses do not change its results.
  ExperimentConfig c = config;
  c.output_dir = "-";
  c.run_id.clear();
  c.threads = 1;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : echo_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace sgf
