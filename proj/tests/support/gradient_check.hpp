#pragma once

#include <vector>

#include "sgf/ppo.hpp"
#include "support/oracles.hpp"

namespace sgf::testing {

// Random 8-dimensional actor-critic instance with a batch collected under a
// nearby "old" policy, so ratios differ from one and some samples clip.
struct GradientInstance {
  rl::GaussianActor actor;
  rl::Mlp critic;
  std::vector<rl::Transition> batch;
  std::vector<double> advantages;
  double clip_ratio{0.1};
  double discount{0.99};
};

inline GradientInstance make_gradient_instance(std::uint64_t seed, rl::Squash squash = rl::Squash::sigmoid) {
  GradientInstance g;
  Rng rng(seed);
  const int dim = 8;
  g.actor = rl::GaussianActor(dim, dim, 16, squash, -0.3, -4.6);
  g.actor.mean_net().initialize(rng, 0.5);
  for (Eigen::Index i = 0; i < g.actor.log_std().size(); ++i) g.actor.log_std()(i) = -0.5 + 0.3 * standard_normal(rng);
  g.critic = rl::Mlp({dim, 16, 16, 1});
  g.critic.initialize(rng, 1.0);
  for (Eigen::Index i = 0; i < g.critic.params().size(); ++i) g.critic.params()(i) += 0.05 * standard_normal(rng);

  rl::GaussianActor old = g.actor;
  Eigen::VectorXd flat = old.flat_params();
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) += 0.05 * standard_normal(rng);
  old.set_flat_params(flat);

  for (int n = 0; n < 12; ++n) {
    rl::Transition t;
    t.state = Eigen::VectorXd(dim);
    t.next_state = Eigen::VectorXd(dim);
    for (int i = 0; i < dim; ++i) {
      t.state(i) = standard_normal(rng);
      t.next_state(i) = standard_normal(rng);
    }
    const auto s = old.sample(t.state, rng);
    t.action = s.raw;
    t.log_prob_old = s.log_prob;
    t.reward = standard_normal(rng);
    g.batch.push_back(t);
    g.advantages.push_back(standard_normal(rng));
  }
  return g;
}

inline double clip_loss_gradient_error(const GradientInstance& g) {
  const auto analytic = rl::ppo_clip_loss(g.batch, g.advantages, g.actor, g.clip_ratio);
  Eigen::VectorXd a(analytic.grad.mean_net.size() + analytic.grad.log_std.size());
  a << analytic.grad.mean_net, analytic.grad.log_std;
  rl::GaussianActor probe = g.actor;
  const auto numeric = central_difference(
      [&](const Eigen::VectorXd& p) {
        probe.set_flat_params(p);
        return rl::ppo_clip_loss(g.batch, g.advantages, probe, g.clip_ratio).objective;
      },
      g.actor.flat_params());
  return relative_error(a, numeric);
}

inline double critic_loss_gradient_error(const GradientInstance& g) {
  const auto analytic = rl::critic_loss(g.batch, g.critic, g.discount);
  rl::Mlp probe = g.critic;
  const auto numeric = central_difference(
      [&](const Eigen::VectorXd& p) {
        probe.params() = p;
        return rl::critic_loss(g.batch, probe, g.discount).loss;
      },
      g.critic.params());
  return relative_error(analytic.grad, numeric);
}

}  // namespace sgf::testing
