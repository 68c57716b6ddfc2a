#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "tadam/mlp.hpp"

using namespace tadam;

namespace {

Batch random_batch(std::size_t n, std::size_t in, std::size_t out, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Batch b{Eigen::MatrixXd(n, in), Eigen::MatrixXd(n, out)};
  for (Eigen::Index i = 0; i < b.inputs.size(); ++i) b.inputs.data()[i] = u(rng);
  for (Eigen::Index i = 0; i < b.targets.size(); ++i) b.targets.data()[i] = u(rng);
  return b;
}

// Row-at-a-time forward pass using plain loops.
Eigen::MatrixXd reference_forward(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), layers.back().weight.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::vector<double> a(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) a[c] = x(r, c);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& W = layers[l].weight;
      std::vector<double> z(W.rows());
      for (Eigen::Index i = 0; i < W.rows(); ++i) {
        double s = layers[l].bias(i);
        for (Eigen::Index j = 0; j < W.cols(); ++j) s += W(i, j) * a[j];
        z[i] = (l + 1 < layers.size()) ? std::max(0.0, s) : s;
      }
      a = z;
    }
    for (std::size_t i = 0; i < a.size(); ++i) out(r, i) = a[i];
  }
  return out;
}

double max_relative_fd_error(MlpModel& model, const Batch& batch, double h) {
  auto analytic = model.mse_loss_and_grad(batch);
  auto groups = model.parameter_groups();
  auto agroups = analytic.groups();
  double worst = 0.0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    std::vector<double> fd(groups[gi].size());
    for (std::size_t j = 0; j < groups[gi].size(); ++j) {
      const double saved = groups[gi][j];
      groups[gi][j] = saved + h;
      const double up = mse(model.forward(batch.inputs), batch.targets);
      groups[gi][j] = saved - h;
      const double down = mse(model.forward(batch.inputs), batch.targets);
      groups[gi][j] = saved;
      fd[j] = (up - down) / (2 * h);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < fd.size(); ++j) {
      num += (fd[j] - agroups[gi][j]) * (fd[j] - agroups[gi][j]);
      den += fd[j] * fd[j];
    }
    worst = std::max(worst, std::sqrt(num) / std::max(std::sqrt(den), 1e-12));
  }
  return worst;
}

}  // namespace

TEST_CASE("zero network outputs zero") {
  std::vector<DenseLayer> layers;
  layers.push_back({Eigen::MatrixXd::Zero(4, 2), Eigen::VectorXd::Zero(4)});
  layers.push_back({Eigen::MatrixXd::Zero(1, 4), Eigen::VectorXd::Zero(1)});
  MlpModel model(layers);
  Eigen::MatrixXd x(3, 2);
  x << 1, 2, -3, 4, 100, -7;
  CHECK(model.forward(x).isZero(0.0));
}

TEST_CASE("single affine layer") {
  Eigen::MatrixXd w(1, 1);
  w << 2.0;
  Eigen::VectorXd b(1);
  b << 1.0;
  MlpModel model({{w, b}});
  Eigen::MatrixXd x(1, 1);
  x << 3.0;
  CHECK(model.forward(x)(0, 0) == 7.0);
}

TEST_CASE("forward matches loop reference on the regression shape") {
  auto model = init_model(kRegressionShape, 4);
  auto batch = random_batch(37, 1, 1, 9);
  auto ref = reference_forward(model.layers(), batch.inputs);
  auto got = model.forward(batch.inputs);
  CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constructor rejects inconsistent layers") {
  std::vector<DenseLayer> bad;
  bad.push_back({Eigen::MatrixXd::Zero(4, 2), Eigen::VectorXd::Zero(4)});
  bad.push_back({Eigen::MatrixXd::Zero(1, 3), Eigen::VectorXd::Zero(1)});
  CHECK_THROWS_AS(MlpModel{bad}, std::invalid_argument);
  std::vector<DenseLayer> bias;
  bias.push_back({Eigen::MatrixXd::Zero(4, 2), Eigen::VectorXd::Zero(3)});
  CHECK_THROWS_AS(MlpModel{bias}, std::invalid_argument);
  CHECK_THROWS_AS(MlpModel{std::vector<DenseLayer>{}}, std::invalid_argument);
  const std::size_t zero_width[] = {1, 0, 1};
  CHECK_THROWS_AS(init_model(zero_width, 0), std::invalid_argument);
}

TEST_CASE("perfect fit gives zero loss and zero gradient") {
  auto model = init_model(kRegressionShape, 1);
  auto batch = random_batch(16, 1, 1, 2);
  batch.targets = model.forward(batch.inputs);
  auto lg = model.mse_loss_and_grad(batch);
  CHECK(lg.loss == 0.0);
  for (auto g : lg.groups())
    for (double x : g) CHECK(x == 0.0);
}

TEST_CASE("empty batch is rejected") {
  auto model = init_model(kRegressionShape, 1);
  Batch empty{Eigen::MatrixXd(0, 1), Eigen::MatrixXd(0, 1)};
  CHECK_THROWS_AS(model.mse_loss_and_grad(empty), std::invalid_argument);
}

TEST_CASE("backward matches central differences on the 5x50 network") {
  auto model = init_model(kRegressionShape, 7);
  auto batch = random_batch(32, 1, 1, 3);
  CHECK(max_relative_fd_error(model, batch, 1e-5) < 1e-4);
}

TEST_CASE("backward matches central differences on random small shapes") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::size_t> sizes;
    const int depth = 2 + static_cast<int>(rng() % 3);
    for (int l = 0; l <= depth; ++l) sizes.push_back(1 + rng() % 6);
    auto model = init_model(sizes, trial);
    auto batch = random_batch(1 + rng() % 9, sizes.front(), sizes.back(), trial + 100);
    CHECK(max_relative_fd_error(model, batch, 1e-5) < 1e-4);
  }
}

TEST_CASE("init is deterministic in seed and respects fan-in bounds") {
  auto a = init_model(kRegressionShape, 5);
  auto b = init_model(kRegressionShape, 5);
  auto c = init_model(kRegressionShape, 6);
  bool differs = false;
  for (std::size_t l = 0; l < a.num_layers(); ++l) {
    CHECK(a.layers()[l].weight == b.layers()[l].weight);
    CHECK(a.layers()[l].bias == b.layers()[l].bias);
    differs = differs || a.layers()[l].weight != c.layers()[l].weight;
    const double bound = 1.0 / std::sqrt(static_cast<double>(a.layers()[l].weight.cols()));
    CHECK(a.layers()[l].weight.cwiseAbs().maxCoeff() <= bound);
    CHECK(a.layers()[l].bias.cwiseAbs().maxCoeff() <= bound);
  }
  CHECK(differs);
}

TEST_CASE("parameter groups are ordered weight then bias per layer") {
  auto model = init_model(kRegressionShape, 0);
  auto sizes = model.group_sizes();
  CHECK(sizes == std::vector<std::size_t>{50, 50, 2500, 50, 2500, 50, 2500, 50, 50, 1});
  CHECK(model.parameter_count() == 7801);
  auto groups = model.parameter_groups();
  groups[3][0] = 42.0;
  CHECK(model.layers()[1].bias(0) == 42.0);
}
