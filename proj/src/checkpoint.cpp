#include "sgf/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sgf/errors.hpp"

namespace sgf::ckpt {

using nlohmann::json;

namespace {

json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const json& j, Eigen::Index expected, const char* what) {
  const auto xs = j.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(xs.size()) != expected) {
    throw ConfigError(std::string("checkpoint field '") + what + "' has the wrong length");
  }
  return Eigen::Map<const Eigen::VectorXd>(xs.data(), expected);
}

json adam_to_json(const rl::Adam& a) {
  return {{"learning_rate", a.learning_rate}, {"beta1", a.beta1},
          {"beta2", a.beta2},                 {"epsilon", a.epsilon},
          {"steps", a.steps},                 {"first_moment", vec_to_json(a.first_moment)},
          {"second_moment", vec_to_json(a.second_moment)}};
}

void adam_from_json(const json& j, rl::Adam& a, const char* what) {
  a.learning_rate = j.at("learning_rate").get<double>();
  a.beta1 = j.at("beta1").get<double>();
  a.beta2 = j.at("beta2").get<double>();
  a.epsilon = j.at("epsilon").get<double>();
  a.steps = j.at("steps").get<long long>();
  a.first_moment = vec_from_json(j.at("first_moment"), a.first_moment.size(), what);
  a.second_moment = vec_from_json(j.at("second_moment"), a.second_moment.size(), what);
}

rl::AgentSpaces spaces_of(const rl::PpoAgent& agent) {
  return {agent.actor().state_dim(), agent.actor().action_dim(), agent.actor().squash_kind()};
}

json ppo_to_json(const rl::PpoConfig& c) {
  return {{"clip_ratio", c.clip_ratio},
          {"discount", c.discount},
          {"actor_lr", c.actor_lr},
          {"critic_lr", c.critic_lr},
          {"epochs", c.epochs},
          {"lower_update_period", c.lower_update_period},
          {"upper_update_period", c.upper_update_period},
          {"batch_capacity", c.batch_capacity},
          {"minibatch_size", c.minibatch_size},
          {"hidden_units", c.hidden_units},
          {"log_std_init", c.log_std_init},
          {"log_std_floor", c.log_std_floor},
          {"normalize_advantages", c.normalize_advantages},
          {"penalty_lambda", c.penalty_lambda},
          {"reward_scale", c.reward_scale}};
}

rl::PpoConfig ppo_from_json(const json& j) {
  rl::PpoConfig c;
  c.clip_ratio = j.at("clip_ratio").get<double>();
  c.discount = j.at("discount").get<double>();
  c.actor_lr = j.at("actor_lr").get<double>();
  c.critic_lr = j.at("critic_lr").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.lower_update_period = j.at("lower_update_period").get<int>();
  c.upper_update_period = j.at("upper_update_period").get<int>();
  c.batch_capacity = j.at("batch_capacity").get<std::size_t>();
  c.minibatch_size = j.at("minibatch_size").get<std::size_t>();
  c.hidden_units = j.at("hidden_units").get<int>();
  c.log_std_init = j.at("log_std_init").get<double>();
  c.log_std_floor = j.at("log_std_floor").get<double>();
  c.normalize_advantages = j.at("normalize_advantages").get<bool>();
  c.penalty_lambda = j.at("penalty_lambda").get<double>();
  c.reward_scale = j.at("reward_scale").get<double>();
  return c;
}

json agent_to_json(const rl::PpoAgent& agent) {
  return {{"architecture", architecture_descriptor(spaces_of(agent), agent.config().hidden_units)},
          {"ppo", ppo_to_json(agent.config())},
          {"actor", vec_to_json(agent.actor().mean_net().params())},
          {"log_std", vec_to_json(agent.actor().log_std())},
          {"critic", vec_to_json(agent.critic().params())},
          {"actor_optimizer", adam_to_json(agent.actor_optimizer())},
          {"log_std_optimizer", adam_to_json(agent.log_std_optimizer())},
          {"critic_optimizer", adam_to_json(agent.critic_optimizer())},
          {"shuffle_rng", serialize_rng(agent.shuffle_rng())}};
}

rl::PpoAgent agent_from_json(const json& j, const rl::AgentSpaces& spaces, int hidden_units, const char* role) {
  const std::string want = architecture_descriptor(spaces, hidden_units);
  const std::string got = j.at("architecture").get<std::string>();
  if (got != want) {
    throw ConfigError(std::string(role) + " checkpoint architecture '" + got + "' does not match '" + want + "'");
  }
  rl::PpoAgent agent(spaces, ppo_from_json(j.at("ppo")), 0);
  auto& net = agent.actor().mean_net();
  net.params() = vec_from_json(j.at("actor"), net.params().size(), "actor");
  agent.actor().log_std() = vec_from_json(j.at("log_std"), agent.actor().log_std().size(), "log_std");
  agent.critic().params() = vec_from_json(j.at("critic"), agent.critic().params().size(), "critic");
  adam_from_json(j.at("actor_optimizer"), agent.actor_optimizer(), "actor_optimizer");
  adam_from_json(j.at("log_std_optimizer"), agent.log_std_optimizer(), "log_std_optimizer");
  adam_from_json(j.at("critic_optimizer"), agent.critic_optimizer(), "critic_optimizer");
  agent.shuffle_rng() = deserialize_rng(j.at("shuffle_rng").get<std::string>());
  return agent;
}

}  // namespace

std::string architecture_descriptor(const rl::AgentSpaces& spaces, int hidden_units) {
  std::ostringstream os;
  os << "mlp-tanh:" << spaces.state_dim << "-" << hidden_units << "-" << hidden_units << "-" << spaces.action_dim
     << ";squash=" << (spaces.squash == rl::Squash::sigmoid ? "sigmoid" : "identity")
     << ";critic:" << spaces.state_dim << "-" << hidden_units << "-" << hidden_units << "-1";
  return os.str();
}

void save(const Bundle& bundle, const std::string& path) {
  json j;
  j["format"] = "sgf-checkpoint";
  j["version"] = kFormatVersion;
  j["config_hash"] = bundle.config_hash;
  if (bundle.lower) j["lower"] = agent_to_json(*bundle.lower);
  if (bundle.upper) j["upper"] = agent_to_json(*bundle.upper);
  if (bundle.policy_rng) j["policy_rng"] = serialize_rng(*bundle.policy_rng);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint '" + path + "'");
  out << j.dump(1) << '\n';
  if (!out) throw ConfigError("failed writing checkpoint '" + path + "'");
}

Bundle load(const std::string& path, const std::optional<rl::AgentSpaces>& expect_lower,
            const std::optional<rl::AgentSpaces>& expect_upper, int hidden_units) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read checkpoint '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  try {
    if (j.value("format", std::string{}) != "sgf-checkpoint") throw ConfigError("not an sgf checkpoint: " + path);
    if (j.at("version").get<int>() != kFormatVersion) throw ConfigError("unsupported checkpoint version in " + path);
    Bundle b;
    b.config_hash = j.at("config_hash").get<std::uint64_t>();
    if (expect_lower) {
      if (!j.contains("lower")) throw ConfigError("checkpoint '" + path + "' has no lower agent");
      b.lower = agent_from_json(j.at("lower"), *expect_lower, hidden_units, "lower");
    }
    if (expect_upper) {
      if (!j.contains("upper")) throw ConfigError("checkpoint '" + path + "' has no upper agent");
      b.upper = agent_from_json(j.at("upper"), *expect_upper, hidden_units, "upper");
    }
    if (j.contains("policy_rng")) b.policy_rng = deserialize_rng(j.at("policy_rng").get<std::string>());
    return b;
  } catch (const json::exception& e) {
    throw ConfigError("malformed checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace sgf::ckpt
