#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sgf/mlp.hpp"
#include "sgf/rng.hpp"

namespace sgf::rl {

struct PpoConfig {
  double clip_ratio{0.1};
  double discount{0.99};
  double actor_lr{3e-4};
  double critic_lr{1e-3};
  int epochs{5};
  int lower_update_period{64};
  int upper_update_period{256};
  std::size_t batch_capacity{4096};
  std::size_t minibatch_size{64};
  int hidden_units{64};
  double log_std_init{-0.6931471805599453};  // log(0.5)
  double log_std_floor{-4.605170185988091};  // log(0.01)
  bool normalize_advantages{true};
  double penalty_lambda{10.0};
  double reward_scale{1.0};  // multiplies stored rewards; keeps critic targets O(1)

  void validate() const;
};

enum class Squash {
  sigmoid,   // actions in (0, 1)
  identity,  // raw reals, post-processed by the caller
};

struct ActorSample {
  Eigen::VectorXd raw;     // pre-squash Gaussian draw
  Eigen::VectorXd action;  // squashed
  double log_prob{0.0};
};

struct ActorGrad {
  Eigen::VectorXd mean_net;
  Eigen::VectorXd log_std;
};

// Diagonal Gaussian over pre-squash actions: mean from an MLP, log-std a
// learned state-independent vector.
class GaussianActor {
 public:
  GaussianActor() = default;
  GaussianActor(int state_dim, int action_dim, int hidden, Squash squash, double log_std_init,
                double log_std_floor);

  Mlp& mean_net() { return mean_net_; }
  const Mlp& mean_net() const { return mean_net_; }
  Eigen::VectorXd& log_std() { return log_std_; }
  const Eigen::VectorXd& log_std() const { return log_std_; }
  Squash squash_kind() const { return squash_; }
  double log_std_floor() const { return log_std_floor_; }
  int state_dim() const { return mean_net_.input_dim(); }
  int action_dim() const { return mean_net_.output_dim(); }

  Eigen::VectorXd mean(const Eigen::VectorXd& state) const { return mean_net_.forward(state); }
  Eigen::VectorXd squash(const Eigen::VectorXd& raw) const;
  ActorSample sample(const Eigen::VectorXd& state, Rng& rng) const;
  Eigen::VectorXd deterministic_action(const Eigen::VectorXd& state) const { return squash(mean(state)); }

  // log pi(action | state), including the sigmoid change-of-variables term.
  double log_prob(const Eigen::VectorXd& state, const Eigen::VectorXd& raw) const;
  // Same value; adds weight * d log_prob / d params into grad.
  double log_prob_with_grad(const Eigen::VectorXd& state, const Eigen::VectorXd& raw, double weight,
                            ActorGrad& grad) const;

  ActorGrad zero_grad() const;
  void clamp_log_std();

  Eigen::VectorXd flat_params() const;
  void set_flat_params(const Eigen::VectorXd& flat);

 private:
  Mlp mean_net_;
  Eigen::VectorXd log_std_;
  Squash squash_{Squash::sigmoid};
  double log_std_floor_{-4.605170185988091};
};

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;  // raw pre-squash sample
  double reward{0.0};
  Eigen::VectorXd next_state;
  double log_prob_old{0.0};
};

double advantage(double reward, double value, double next_value, double discount);

std::vector<double> compute_advantages(std::span<const Transition> batch, const Mlp& critic, double discount);

struct ClipLossResult {
  double objective{0.0};  // maximized
  ActorGrad grad;         // d objective / d params
  double clip_fraction{0.0};
  double mean_ratio{0.0};
};

// mean_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i), rho_i = exp(log pi - log pi_old).
ClipLossResult ppo_clip_loss(std::span<const Transition> batch, std::span<const double> advantages,
                             const GaussianActor& actor, double clip_ratio);

struct CriticLossResult {
  double loss{0.0};
  Eigen::VectorXd grad;
};

// mean_i (r_i + gamma V(s'_i) - V(s_i))^2, differentiated through both values.
CriticLossResult critic_loss(std::span<const Transition> batch, const Mlp& critic, double discount);

struct UpdateStats {
  double actor_objective{0.0};
  double critic_loss{0.0};
  double clip_fraction{0.0};
  double first_epoch_ratio{1.0};
  std::size_t batch_size{0};
};

struct AgentSpaces {
  int state_dim{1};
  int action_dim{1};
  Squash squash{Squash::sigmoid};
};

// One actor-critic pair with its optimizer state and sample batch.
class PpoAgent {
 public:
  PpoAgent() = default;
  PpoAgent(const AgentSpaces& spaces, const PpoConfig& config, std::uint64_t seed);

  ActorSample act(const Eigen::VectorXd& state, Rng& rng) const { return actor_.sample(state, rng); }
  Eigen::VectorXd act_deterministic(const Eigen::VectorXd& state) const {
    return actor_.deterministic_action(state);
  }
  double value(const Eigen::VectorXd& state) const { return critic_.forward(state)(0); }

  void store(Transition t);
  std::size_t pending() const { return batch_.size(); }
  std::span<const Transition> batch() const { return batch_; }

  // Epochs of clipped-surrogate ascent and critic descent over the stored
  // batch; the batch is cleared afterwards. Throws NumericalError on NaN/Inf.
  UpdateStats update();

  GaussianActor& actor() { return actor_; }
  const GaussianActor& actor() const { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& critic() const { return critic_; }
  Adam& actor_optimizer() { return actor_opt_; }
  Adam& log_std_optimizer() { return log_std_opt_; }
  Adam& critic_optimizer() { return critic_opt_; }
  const Adam& actor_optimizer() const { return actor_opt_; }
  const Adam& log_std_optimizer() const { return log_std_opt_; }
  const Adam& critic_optimizer() const { return critic_opt_; }
  const PpoConfig& config() const { return config_; }
  Rng& shuffle_rng() { return shuffle_rng_; }
  const Rng& shuffle_rng() const { return shuffle_rng_; }

 private:
  PpoConfig config_;
  GaussianActor actor_;
  Mlp critic_;
  Adam actor_opt_;
  Adam log_std_opt_;
  Adam critic_opt_;
  std::vector<Transition> batch_;
  Rng shuffle_rng_;
};

}  // namespace sgf::rl
