#include "tadam/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tadam/random.hpp"

namespace tadam {
namespace {

std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

std::vector<std::span<const double>> LossAndGrad::groups() const {
  std::vector<std::span<const double>> out;
  out.reserve(2 * layers.size());
  for (const auto& layer : layers) {
    out.emplace_back(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
  return out;
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weight.rows() == 0 || layer.weight.cols() == 0) {
      throw std::invalid_argument("layer " + std::to_string(l) + " has zero width");
    }
    if (layer.bias.size() != layer.weight.rows()) {
      throw std::invalid_argument("layer " + std::to_string(l) + ": bias length " +
                                  std::to_string(layer.bias.size()) + " does not match weight " +
                                  shape(layer.weight));
    }
    if (l > 0 && layers_[l - 1].weight.rows() != layer.weight.cols()) {
      throw std::invalid_argument("layer " + std::to_string(l) + " expects " +
                                  std::to_string(layer.weight.cols()) + " inputs but layer " +
                                  std::to_string(l - 1) + " produces " +
                                  std::to_string(layers_[l - 1].weight.rows()));
    }
  }
}

Eigen::MatrixXd MlpModel::forward(const Eigen::MatrixXd& inputs) {
  if (static_cast<std::size_t>(inputs.cols()) != input_dim()) {
    throw std::invalid_argument("input width " + std::to_string(inputs.cols()) +
                                " does not match network input " + std::to_string(input_dim()));
  }
  pre_activations_.resize(layers_.size());
  activations_.resize(layers_.size() + 1);
  activations_[0] = inputs.transpose();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    pre_activations_[l].noalias() = layer.weight * activations_[l];
    pre_activations_[l].colwise() += layer.bias;
    if (l + 1 < layers_.size()) {
      activations_[l + 1] = pre_activations_[l].cwiseMax(0.0);
    } else {
      activations_[l + 1] = pre_activations_[l];
    }
  }
  return activations_.back().transpose();
}

LossAndGrad MlpModel::mse_loss_and_grad(const Batch& batch) {
  if (batch.inputs.rows() == 0) throw std::invalid_argument("empty batch");
  if (batch.inputs.rows() != batch.targets.rows()) {
    throw std::invalid_argument("batch has " + std::to_string(batch.inputs.rows()) +
                                " inputs but " + std::to_string(batch.targets.rows()) +
                                " targets");
  }
  if (static_cast<std::size_t>(batch.targets.cols()) != output_dim()) {
    throw std::invalid_argument("target width " + std::to_string(batch.targets.cols()) +
                                " does not match network output " + std::to_string(output_dim()));
  }
  forward(batch.inputs);
  return backward(batch.targets.transpose());
}

LossAndGrad MlpModel::backward(const Eigen::MatrixXd& targets) {
  const auto& output = activations_.back();
  const double count = static_cast<double>(output.size());
  const Eigen::MatrixXd residual = output - targets;

  LossAndGrad result;
  result.loss = residual.squaredNorm() / count;
  result.layers.resize(layers_.size());

  Eigen::MatrixXd delta = (2.0 / count) * residual;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    auto& grad = result.layers[l];
    grad.weight.noalias() = delta * activations_[l].transpose();
    grad.bias = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd upstream = layers_[l].weight.transpose() * delta;
    delta = upstream.cwiseProduct((pre_activations_[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return result;
}

std::vector<std::span<double>> MlpModel::parameter_groups() {
  std::vector<std::span<double>> out;
  out.reserve(2 * layers_.size());
  for (auto& layer : layers_) {
    out.emplace_back(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  }
  return out;
}

std::vector<std::size_t> MlpModel::group_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(2 * layers_.size());
  for (const auto& layer : layers_) {
    sizes.push_back(static_cast<std::size_t>(layer.weight.size()));
    sizes.push_back(static_cast<std::size_t>(layer.bias.size()));
  }
  return sizes;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t total = 0;
  for (const auto size : group_sizes()) total += size;
  return total;
}

MlpModel init_model(std::span<const std::size_t> layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("layer specification needs an input and at least one layer");
  }
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    if (layer_sizes[i] == 0) {
      throw std::invalid_argument("layer size at position " + std::to_string(i) + " is zero");
    }
  }
  auto engine = make_stream(seed, Stream::Init);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const auto fan_in = static_cast<Eigen::Index>(layer_sizes[l]);
    const auto fan_out = static_cast<Eigen::Index>(layer_sizes[l + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in), Eigen::VectorXd(fan_out)};
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index k = 0; k < layer.weight.size(); ++k) {
      layer.weight.data()[k] = bound * (2.0 * uniform01(engine) - 1.0);
    }
    for (Eigen::Index k = 0; k < layer.bias.size(); ++k) {
      layer.bias[k] = bound * (2.0 * uniform01(engine) - 1.0);
    }
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers));
}

double mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
    throw std::invalid_argument("mse: shape " + shape(predictions) + " vs " + shape(targets));
  }
  if (predictions.size() == 0) throw std::invalid_argument("mse: empty input");
  return (predictions - targets).squaredNorm() / static_cast<double>(predictions.size());
}

}  // namespace tadam
