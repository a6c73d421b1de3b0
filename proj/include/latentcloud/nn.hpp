#pragma once

// Small deterministic layer kernel: pointwise (kernel size 1) convolution,
// dense, ReLU and max-pool over points, each with a hand-derived backward
// pass, plus an Adam optimizer. Everything is double precision.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "latentcloud/random.hpp"

namespace latentcloud {

// Row-major rows x cols matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Applied independently to every point row; weights are in x out.
struct PointwiseConvLayer {
  Matrix weights;
  std::vector<double> bias;

  std::size_t in_features() const { return weights.rows(); }
  std::size_t out_features() const { return weights.cols(); }
  bool operator==(const PointwiseConvLayer&) const = default;
};

// out = x^T W + b; weights are in x out.
struct DenseLayer {
  Matrix weights;
  std::vector<double> bias;

  std::size_t in_features() const { return weights.rows(); }
  std::size_t out_features() const { return weights.cols(); }
  bool operator==(const DenseLayer&) const = default;
};

struct PoolResult {
  std::vector<double> values;
  // Smallest row index attaining the column maximum.
  std::vector<std::size_t> argmax;
};

template <typename Layer>
struct LayerGradients {
  Layer params;  // same shapes as the layer, holding dL/dW and dL/db
  Matrix input;  // dL/dx
};

struct DenseGradients {
  DenseLayer params;
  std::vector<double> input;
};

Matrix pointwise_conv_forward(const PointwiseConvLayer& layer, const Matrix& x);
LayerGradients<PointwiseConvLayer> pointwise_conv_backward(
    const PointwiseConvLayer& layer, const Matrix& x, const Matrix& upstream);

std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> x);
DenseGradients dense_backward(const DenseLayer& layer, std::span<const double> x,
                              std::span<const double> upstream);

Matrix relu_forward(const Matrix& x);
std::vector<double> relu_forward(std::span<const double> x);
// Gradient is gated by the forward input; zero where x <= 0.
Matrix relu_backward(const Matrix& x, const Matrix& upstream);
std::vector<double> relu_backward(std::span<const double> x,
                                  std::span<const double> upstream);

PoolResult maxpool_points(const Matrix& x);
// Routes each column's gradient to its argmax row only.
Matrix maxpool_backward(const PoolResult& pool, std::size_t rows,
                        std::span<const double> upstream);

// Glorot-style uniform weights in +-sqrt(6 / (in + out)), zero bias.
double glorot_bound(std::size_t in, std::size_t out);
PointwiseConvLayer init_pointwise_conv(std::size_t in, std::size_t out, Rng& rng);
DenseLayer init_dense(std::size_t in, std::size_t out, Rng& rng);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moments are stored per parameter tensor, in the order the tensors are
// passed to adam_step.
struct OptimizerState {
  AdamConfig config;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;
};

// Sizes the moment buffers for the given parameter tensor sizes.
OptimizerState make_optimizer_state(const AdamConfig& config,
                                    std::span<const std::size_t> tensor_sizes);

void adam_step(OptimizerState& state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads);

}  // namespace latentcloud
