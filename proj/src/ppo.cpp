#include "sgf/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "sgf/errors.hpp"

namespace sgf::rl {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// log d sigmoid(u) / du = -softplus(-u) - softplus(u)
double log_sigmoid_derivative(double u) { return -softplus(-u) - softplus(u); }

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw NumericalError(std::string("non-finite ") + what);
}

}  // namespace

void PpoConfig::validate() const {
  if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) throw ConfigError("clip_ratio must lie in (0, 1)");
  if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("discount must lie in (0, 1]");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (lower_update_period < 1 || upper_update_period < 1) throw ConfigError("update periods must be >= 1");
  if (batch_capacity < 1 || minibatch_size < 1) throw ConfigError("batch sizes must be >= 1");
  if (hidden_units < 1) throw ConfigError("hidden_units must be >= 1");
  if (!(log_std_init >= log_std_floor)) throw ConfigError("log_std_init below its floor");
  if (!(penalty_lambda >= 0.0)) throw ConfigError("penalty_lambda must be >= 0");
  if (!(reward_scale > 0.0)) throw ConfigError("reward_scale must be positive");
}

GaussianActor::GaussianActor(int state_dim, int action_dim, int hidden, Squash squash, double log_std_init,
                             double log_std_floor)
    : mean_net_({state_dim, hidden, hidden, action_dim}),
      log_std_(Eigen::VectorXd::Constant(action_dim, log_std_init)),
      squash_(squash),
      log_std_floor_(log_std_floor) {}

Eigen::VectorXd GaussianActor::squash(const Eigen::VectorXd& raw) const {
  if (squash_ == Squash::identity) return raw;
  return (1.0 / (1.0 + (-raw.array()).exp())).matrix();
}

ActorSample GaussianActor::sample(const Eigen::VectorXd& state, Rng& rng) const {
  ActorSample s;
  const Eigen::VectorXd mu = mean(state);
  s.raw.resize(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) s.raw(i) = mu(i) + std::exp(log_std_(i)) * standard_normal(rng);
  s.action = squash(s.raw);
  s.log_prob = log_prob(state, s.raw);
  return s;
}

double GaussianActor::log_prob(const Eigen::VectorXd& state, const Eigen::VectorXd& raw) const {
  const Eigen::VectorXd mu = mean(state);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double z = (raw(i) - mu(i)) * std::exp(-log_std_(i));
    lp += -0.5 * z * z - log_std_(i) - kHalfLog2Pi;
    if (squash_ == Squash::sigmoid) lp -= log_sigmoid_derivative(raw(i));
  }
  return lp;
}

double GaussianActor::log_prob_with_grad(const Eigen::VectorXd& state, const Eigen::VectorXd& raw, double weight,
                                         ActorGrad& grad) const {
  Mlp::Cache cache;
  const Eigen::VectorXd mu = mean_net_.forward(state, &cache);
  Eigen::VectorXd grad_mu(mu.size());
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double inv_std = std::exp(-log_std_(i));
    const double z = (raw(i) - mu(i)) * inv_std;
    lp += -0.5 * z * z - log_std_(i) - kHalfLog2Pi;
    if (squash_ == Squash::sigmoid) lp -= log_sigmoid_derivative(raw(i));
    grad_mu(i) = weight * z * inv_std;
    grad.log_std(i) += weight * (z * z - 1.0);
  }
  mean_net_.backward(cache, grad_mu, grad.mean_net);
  return lp;
}

ActorGrad GaussianActor::zero_grad() const {
  return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mean_net_.num_params())),
          Eigen::VectorXd::Zero(log_std_.size())};
}

void GaussianActor::clamp_log_std() { log_std_ = log_std_.cwiseMax(log_std_floor_); }

Eigen::VectorXd GaussianActor::flat_params() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(mean_net_.num_params()) + log_std_.size());
  flat << mean_net_.params(), log_std_;
  return flat;
}

void GaussianActor::set_flat_params(const Eigen::VectorXd& flat) {
  const auto n = static_cast<Eigen::Index>(mean_net_.num_params());
  mean_net_.params() = flat.head(n);
  log_std_ = flat.tail(log_std_.size());
}

double advantage(double reward, double value, double next_value, double discount) {
  return reward + discount * next_value - value;
}

std::vector<double> compute_advantages(std::span<const Transition> batch, const Mlp& critic, double discount) {
  std::vector<double> adv;
  adv.reserve(batch.size());
  for (const auto& t : batch) {
    adv.push_back(advantage(t.reward, critic.forward(t.state)(0), critic.forward(t.next_state)(0), discount));
  }
  return adv;
}

ClipLossResult ppo_clip_loss(std::span<const Transition> batch, std::span<const double> advantages,
                             const GaussianActor& actor, double clip_ratio) {
  ClipLossResult r;
  r.grad = actor.zero_grad();
  if (batch.empty()) return r;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& t = batch[i];
    const double a = advantages[i];
    const double lp = actor.log_prob(t.state, t.action);
    const double ratio = std::exp(lp - t.log_prob_old);
    const double clipped_ratio = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio);
    const double unclipped_term = ratio * a;
    const double clipped_term = clipped_ratio * a;
    r.mean_ratio += ratio * inv_n;
    if (clipped_ratio != ratio) ++clipped;
    if (unclipped_term <= clipped_term) {
      r.objective += unclipped_term * inv_n;
      // d(rho A)/dtheta = A rho dlogpi/dtheta
      if (a != 0.0) actor.log_prob_with_grad(t.state, t.action, a * ratio * inv_n, r.grad);
    } else {
      r.objective += clipped_term * inv_n;
    }
  }
  r.clip_fraction = static_cast<double>(clipped) * inv_n;
  return r;
}

CriticLossResult critic_loss(std::span<const Transition> batch, const Mlp& critic, double discount) {
  CriticLossResult r;
  r.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(critic.num_params()));
  if (batch.empty()) return r;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  Mlp::Cache cache_s;
  Mlp::Cache cache_next;
  Eigen::VectorXd g(1);
  for (const auto& t : batch) {
    const double v = critic.forward(t.state, &cache_s)(0);
    const double v_next = critic.forward(t.next_state, &cache_next)(0);
    const double adv = advantage(t.reward, v, v_next, discount);
    r.loss += adv * adv * inv_n;
    g(0) = 2.0 * adv * discount * inv_n;
    critic.backward(cache_next, g, r.grad);
    g(0) = -2.0 * adv * inv_n;
    critic.backward(cache_s, g, r.grad);
  }
  return r;
}

PpoAgent::PpoAgent(const AgentSpaces& spaces, const PpoConfig& config, std::uint64_t seed)
    : config_(config),
      actor_(spaces.state_dim, spaces.action_dim, config.hidden_units, spaces.squash, config.log_std_init,
             config.log_std_floor),
      critic_({spaces.state_dim, config.hidden_units, config.hidden_units, 1}),
      shuffle_rng_(mix_seed(seed, 101)) {
  config_.validate();
  Rng init = make_rng(seed, streams::init);
  actor_.mean_net().initialize(init, 0.01);
  critic_.initialize(init, 1.0);
  actor_opt_ = Adam(actor_.mean_net().num_params(), config_.actor_lr);
  log_std_opt_ = Adam(static_cast<std::size_t>(actor_.log_std().size()), config_.actor_lr);
  critic_opt_ = Adam(critic_.num_params(), config_.critic_lr);
}

void PpoAgent::store(Transition t) {
  if (batch_.size() >= config_.batch_capacity) batch_.erase(batch_.begin());
  batch_.push_back(std::move(t));
}

UpdateStats PpoAgent::update() {
  UpdateStats stats;
  stats.batch_size = batch_.size();
  if (batch_.empty()) return stats;

  std::vector<double> adv = compute_advantages(batch_, critic_, config_.discount);
  for (double a : adv) require_finite(a, "advantage");
  if (config_.normalize_advantages && adv.size() > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(adv.size());
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(adv.size()));
    for (double& a : adv) a = sd > 1e-12 ? (a - mean) / sd : 0.0;
  }

  const std::size_t n = batch_.size();
  const std::size_t mb = std::min(config_.minibatch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Transition> mini;
  std::vector<double> mini_adv;
  std::size_t minibatches = 0;

  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(shuffle_rng_)]);
    }
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t end = std::min(n, start + mb);
      mini.clear();
      mini_adv.clear();
      for (std::size_t i = start; i < end; ++i) {
        mini.push_back(batch_[order[i]]);
        mini_adv.push_back(adv[order[i]]);
      }

      auto clip = ppo_clip_loss(mini, mini_adv, actor_, config_.clip_ratio);
      require_finite(clip.objective, "clipped surrogate objective");
      if (epoch == 0 && start == 0) stats.first_epoch_ratio = clip.mean_ratio;
      // Ascend the surrogate by descending its negation.
      actor_opt_.step(actor_.mean_net().params(), -clip.grad.mean_net);
      log_std_opt_.step(actor_.log_std(), -clip.grad.log_std);
      actor_.clamp_log_std();

      auto critic = critic_loss(mini, critic_, config_.discount);
      require_finite(critic.loss, "critic loss");
      critic_opt_.step(critic_.params(), critic.grad);

      stats.actor_objective += clip.objective;
      stats.critic_loss += critic.loss;
      stats.clip_fraction += clip.clip_fraction;
      ++minibatches;
    }
  }
  stats.actor_objective /= static_cast<double>(minibatches);
  stats.critic_loss /= static_cast<double>(minibatches);
  stats.clip_fraction /= static_cast<double>(minibatches);
  if (!actor_.flat_params().allFinite() || !critic_.params().allFinite()) {
    throw NumericalError("non-finite network parameters after update");
  }
  batch_.clear();
  return stats;
}

}  // namespace sgf::rl
