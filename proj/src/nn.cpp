#include "latentcloud/nn.hpp"

#include <cmath>
#include <string>

#include "latentcloud/error.hpp"

namespace latentcloud {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

template <typename Layer>
void check_layer(const Layer& layer, const char* what) {
  if (layer.bias.size() != layer.weights.cols()) {
    throw DimensionError(std::string(what) + ": bias length " +
                         std::to_string(layer.bias.size()) + " does not match " +
                         std::to_string(layer.weights.cols()) + " outputs");
  }
}

// out[j] = b[j] + sum_i x[i] * W[i][j], accumulated in increasing i.
void affine_row(const Matrix& w, std::span<const double> bias, std::span<const double> x,
                std::span<double> out) {
  const std::size_t nout = w.cols();
  for (std::size_t j = 0; j < nout; ++j) out[j] = bias[j];
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double* wrow = w.row(i).data();
    for (std::size_t j = 0; j < nout; ++j) out[j] += xi * wrow[j];
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix " + shape_str(rows, cols) + " given " +
                         std::to_string(data_.size()) + " values");
  }
}

Matrix pointwise_conv_forward(const PointwiseConvLayer& layer, const Matrix& x) {
  check_layer(layer, "pointwise conv");
  if (x.cols() != layer.in_features()) {
    throw DimensionError("pointwise conv expects " + std::to_string(layer.in_features()) +
                         " input features, got " + shape_str(x.rows(), x.cols()));
  }
  Matrix out(x.rows(), layer.out_features());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    affine_row(layer.weights, layer.bias, x.row(r), out.row(r));
  }
  return out;
}

LayerGradients<PointwiseConvLayer> pointwise_conv_backward(const PointwiseConvLayer& layer,
                                                           const Matrix& x,
                                                           const Matrix& upstream) {
  check_layer(layer, "pointwise conv");
  const std::size_t nin = layer.in_features();
  const std::size_t nout = layer.out_features();
  if (x.cols() != nin || upstream.rows() != x.rows() || upstream.cols() != nout) {
    throw DimensionError("pointwise conv backward: input " + shape_str(x.rows(), x.cols()) +
                         ", upstream " + shape_str(upstream.rows(), upstream.cols()) +
                         ", layer " + shape_str(nin, nout));
  }
  LayerGradients<PointwiseConvLayer> g{
      {Matrix(nin, nout), std::vector<double>(nout, 0.0)}, Matrix(x.rows(), nin)};
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto xr = x.row(r);
    const auto ur = upstream.row(r);
    auto dx = g.input.row(r);
    for (std::size_t j = 0; j < nout; ++j) g.params.bias[j] += ur[j];
    for (std::size_t i = 0; i < nin; ++i) {
      const double* wrow = layer.weights.row(i).data();
      double* dwrow = g.params.weights.row(i).data();
      const double xi = xr[i];
      double acc = 0.0;
      for (std::size_t j = 0; j < nout; ++j) {
        dwrow[j] += xi * ur[j];
        acc += wrow[j] * ur[j];
      }
      dx[i] = acc;
    }
  }
  return g;
}

std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> x) {
  check_layer(layer, "dense");
  if (x.size() != layer.in_features()) {
    throw DimensionError("dense expects " + std::to_string(layer.in_features()) +
                         " inputs, got " + std::to_string(x.size()));
  }
  std::vector<double> out(layer.out_features());
  affine_row(layer.weights, layer.bias, x, out);
  return out;
}

DenseGradients dense_backward(const DenseLayer& layer, std::span<const double> x,
                              std::span<const double> upstream) {
  check_layer(layer, "dense");
  const std::size_t nin = layer.in_features();
  const std::size_t nout = layer.out_features();
  if (x.size() != nin || upstream.size() != nout) {
    throw DimensionError("dense backward: input " + std::to_string(x.size()) +
                         ", upstream " + std::to_string(upstream.size()) + ", layer " +
                         shape_str(nin, nout));
  }
  DenseGradients g{{Matrix(nin, nout), std::vector<double>(upstream.begin(), upstream.end())},
                   std::vector<double>(nin, 0.0)};
  for (std::size_t i = 0; i < nin; ++i) {
    const double* wrow = layer.weights.row(i).data();
    double* dwrow = g.params.weights.row(i).data();
    double acc = 0.0;
    for (std::size_t j = 0; j < nout; ++j) {
      dwrow[j] = x[i] * upstream[j];
      acc += wrow[j] * upstream[j];
    }
    g.input[i] = acc;
  }
  return g;
}

Matrix relu_forward(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

std::vector<double> relu_forward(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix relu_backward(const Matrix& x, const Matrix& upstream) {
  if (x.rows() != upstream.rows() || x.cols() != upstream.cols()) {
    throw DimensionError("relu backward: input " + shape_str(x.rows(), x.cols()) +
                         ", upstream " + shape_str(upstream.rows(), upstream.cols()));
  }
  Matrix g(x.rows(), x.cols());
  const auto xv = x.values();
  const auto uv = upstream.values();
  auto gv = g.values();
  for (std::size_t i = 0; i < xv.size(); ++i) gv[i] = xv[i] > 0.0 ? uv[i] : 0.0;
  return g;
}

std::vector<double> relu_backward(std::span<const double> x,
                                  std::span<const double> upstream) {
  if (x.size() != upstream.size()) {
    throw DimensionError("relu backward: input " + std::to_string(x.size()) +
                         ", upstream " + std::to_string(upstream.size()));
  }
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > 0.0 ? upstream[i] : 0.0;
  return g;
}

PoolResult maxpool_points(const Matrix& x) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw DimensionError("max-pool over an empty feature matrix " +
                         shape_str(x.rows(), x.cols()));
  }
  PoolResult out;
  const auto first = x.row(0);
  out.values.assign(first.begin(), first.end());
  out.argmax.assign(x.cols(), 0);
  for (std::size_t r = 1; r < x.rows(); ++r) {
    const auto xr = x.row(r);
    for (std::size_t c = 0; c < x.cols(); ++c) {
      // strict comparison keeps the earliest row on ties
      if (xr[c] > out.values[c]) {
        out.values[c] = xr[c];
        out.argmax[c] = r;
      }
    }
  }
  return out;
}

Matrix maxpool_backward(const PoolResult& pool, std::size_t rows,
                        std::span<const double> upstream) {
  const std::size_t cols = pool.argmax.size();
  if (upstream.size() != cols) {
    throw DimensionError("max-pool backward: upstream " + std::to_string(upstream.size()) +
                         ", pooled width " + std::to_string(cols));
  }
  Matrix g(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    if (pool.argmax[c] >= rows) {
      throw DimensionError("max-pool backward: argmax row out of range");
    }
    g(pool.argmax[c], c) = upstream[c];
  }
  return g;
}

double glorot_bound(std::size_t in, std::size_t out) {
  return std::sqrt(6.0 / static_cast<double>(in + out));
}

namespace {

Matrix glorot_matrix(std::size_t in, std::size_t out, Rng& rng) {
  if (in == 0 || out == 0) {
    throw ConfigError("layer widths must be positive, got " + shape_str(in, out));
  }
  const double bound = glorot_bound(in, out);
  Matrix w(in, out);
  for (double& v : w.values()) v = rng.uniform(-bound, bound);
  return w;
}

}  // namespace

PointwiseConvLayer init_pointwise_conv(std::size_t in, std::size_t out, Rng& rng) {
  return {glorot_matrix(in, out, rng), std::vector<double>(out, 0.0)};
}

DenseLayer init_dense(std::size_t in, std::size_t out, Rng& rng) {
  return {glorot_matrix(in, out, rng), std::vector<double>(out, 0.0)};
}

OptimizerState make_optimizer_state(const AdamConfig& config,
                                    std::span<const std::size_t> tensor_sizes) {
  if (!(config.learning_rate > 0.0) || !(config.beta1 >= 0.0 && config.beta1 < 1.0) ||
      !(config.beta2 >= 0.0 && config.beta2 < 1.0) || !(config.epsilon > 0.0)) {
    throw ConfigError("invalid Adam hyperparameters");
  }
  OptimizerState s;
  s.config = config;
  for (std::size_t n : tensor_sizes) {
    s.first_moment.emplace_back(n, 0.0);
    s.second_moment.emplace_back(n, 0.0);
  }
  return s;
}

void adam_step(OptimizerState& state, std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw DimensionError("adam: " + std::to_string(params.size()) + " parameter tensors, " +
                         std::to_string(grads.size()) + " gradients, " +
                         std::to_string(state.first_moment.size()) + " moment buffers");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size() != grads[t].size() ||
        params[t].size() != state.first_moment[t].size()) {
      throw DimensionError("adam: tensor " + std::to_string(t) + " size mismatch");
    }
  }
  const AdamConfig& c = state.config;
  state.step += 1;
  const double step = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, step);
  const double correction2 = 1.0 - std::pow(c.beta2, step);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& m = state.first_moment[t];
    auto& v = state.second_moment[t];
    const auto g = grads[t];
    auto p = params[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace latentcloud
