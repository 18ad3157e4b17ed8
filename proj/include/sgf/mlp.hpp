#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "sgf/rng.hpp"

namespace sgf::rl {

// Fully connected network with tanh hidden layers and a linear output layer.
// All weights live in one flat vector: per layer a column-major (out x in)
// weight block followed by the bias.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::VectorXd> activations;  // input, then each hidden layer output
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);

  // LeCun-normal hidden weights, output weights scaled by output_scale, zero biases.
  void initialize(Rng& rng, double output_scale);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }

  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x, Cache* cache = nullptr) const;

  // Adds dL/dparams to grad given dL/doutput for the pass recorded in cache.
  void backward(const Cache& cache, const Eigen::VectorXd& grad_out, Eigen::VectorXd& grad) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;  // start of each layer's weight block
  Eigen::VectorXd params_;
};

// Adaptive-moment optimizer (Kingma & Ba) that minimizes.
class Adam {
 public:
  Adam() = default;
  Adam(std::size_t size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

  double learning_rate{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};
  long long steps{0};
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
};

}  // namespace sgf::rl
