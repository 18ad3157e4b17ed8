#include "sgf/mlp.hpp"

#include <cmath>

#include "sgf/errors.hpp"

namespace sgf::rl {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ConfigError("an MLP needs at least input and output layers");
  Eigen::Index total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw ConfigError("MLP layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<Eigen::Index>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
  params_ = Eigen::VectorXd::Zero(total);
}

void Mlp::initialize(Rng& rng, double output_scale) {
  const std::size_t layers = offsets_.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double scale = (l + 1 == layers ? output_scale : 1.0) / std::sqrt(static_cast<double>(in));
    double* w = params_.data() + offsets_[l];
    for (int i = 0; i < in * out; ++i) w[i] = scale * standard_normal(rng);
    for (int i = 0; i < out; ++i) w[in * out + i] = 0.0;
  }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, Cache* cache) const {
  if (x.size() != sizes_.front()) throw ConfigError("MLP input has wrong dimension");
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(x);
  }
  Eigen::VectorXd a = x;
  const std::size_t layers = offsets_.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + offsets_[l], out, in);
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + offsets_[l] + in * out, out);
    Eigen::VectorXd z = w * a + b;
    if (l + 1 < layers) {
      a = z.array().tanh().matrix();
      if (cache) cache->activations.push_back(a);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

void Mlp::backward(const Cache& cache, const Eigen::VectorXd& grad_out, Eigen::VectorXd& grad) const {
  if (grad.size() != params_.size()) grad = Eigen::VectorXd::Zero(params_.size());
  Eigen::VectorXd delta = grad_out;
  for (std::size_t l = offsets_.size(); l-- > 0;) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const Eigen::VectorXd& input = cache.activations[l];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + offsets_[l], out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets_[l] + in * out, out);
    gw.noalias() += delta * input.transpose();
    gb += delta;
    if (l > 0) {
      Eigen::Map<const Eigen::MatrixXd> w(params_.data() + offsets_[l], out, in);
      Eigen::VectorXd back = w.transpose() * delta;
      delta = back.array() * (1.0 - input.array().square());
    }
  }
}

Adam::Adam(std::size_t size, double learning_rate_, double beta1_, double beta2_, double epsilon_)
    : learning_rate(learning_rate_),
      beta1(beta1_),
      beta2(beta2_),
      epsilon(epsilon_),
      first_moment(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))),
      second_moment(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size))) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++steps;
  first_moment = beta1 * first_moment + (1.0 - beta1) * grad;
  second_moment = beta2 * second_moment + (1.0 - beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
  params.array() -= learning_rate * (first_moment.array() / c1) / ((second_moment.array() / c2).sqrt() + epsilon);
}

}  // namespace sgf::rl
