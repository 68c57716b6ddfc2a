#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tadam {

/// y = weight * x + bias, weight is (out x in).
struct DenseLayer {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

/// Rows are samples.
struct Batch {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
};

struct LayerGradients {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

struct LossAndGrad {
  double loss = 0.0;
  std::vector<LayerGradients> layers;

  /// Flat views in parameter-group order: layer0.weight, layer0.bias, layer1.weight, ...
  std::vector<std::span<const double>> groups() const;
};

/// 1 -> 50 -> 50 -> 50 -> 50 -> 1: five weight matrices, ReLU between hidden layers.
inline constexpr std::array<std::size_t, 6> kRegressionShape{1, 50, 50, 50, 50, 1};

/// Fully connected network, ReLU on hidden layers, identity output. Keeps the
/// activations of the last forward pass for backpropagation.
class MlpModel {
 public:
  explicit MlpModel(std::vector<DenseLayer> layers);

  std::size_t input_dim() const { return static_cast<std::size_t>(layers_.front().weight.cols()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(layers_.back().weight.rows()); }
  std::size_t num_layers() const { return layers_.size(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  /// inputs: n x input_dim. Returns n x output_dim.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& inputs);

  /// Mean over all n * output_dim squared errors, and its exact gradient.
  LossAndGrad mse_loss_and_grad(const Batch& batch);

  /// Mutable flat views over every weight matrix and bias vector, in group order.
  std::vector<std::span<double>> parameter_groups();
  std::vector<std::size_t> group_sizes() const;
  std::size_t parameter_count() const;

 private:
  LossAndGrad backward(const Eigen::MatrixXd& targets);

  std::vector<DenseLayer> layers_;
  // Feature-major (features x n) cache of the last forward pass.
  std::vector<Eigen::MatrixXd> pre_activations_;
  std::vector<Eigen::MatrixXd> activations_;
};

/// Weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)), deterministic in seed.
MlpModel init_model(std::span<const std::size_t> layer_sizes, std::uint64_t seed);

/// Mean squared error without touching gradients.
double mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);

}  // namespace tadam
