#pragma once

// Finite-difference checks shared by the unit and acceptance suites. Each
// check draws one random configuration and returns the worst relative error
// between the analytic gradient and central differences (step 1e-6).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "latentcloud/autoencoder.hpp"
#include "latentcloud/metrics.hpp"
#include "latentcloud/nn.hpp"
#include "oracles.hpp"

namespace gradcheck {

using namespace latentcloud;

inline constexpr double kStep = 1e-6;
// Entries smaller than this are compared in absolute terms.
inline constexpr double kFloor = 1e-6;
// Minimum distance from a ReLU kink, max-pool tie or nearest-neighbor tie.
inline constexpr double kKinkMargin = 1e-4;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double check_pointwise_conv(Rng& rng) {
  const std::size_t rows = 1 + rng.below(6), in = 1 + rng.below(6), out = 1 + rng.below(6);
  PointwiseConvLayer layer{oracle::random_matrix(rng, in, out), oracle::random_vector(rng, out)};
  Matrix x = oracle::random_matrix(rng, rows, in);
  const Matrix up = oracle::random_matrix(rng, rows, out);
  auto loss = [&] { return dot(pointwise_conv_forward(layer, x).values(), up.values()); };
  const auto g = pointwise_conv_backward(layer, x, up);
  double worst = 0.0;
  worst = std::max(worst, oracle::max_relative_error(
                              g.params.weights.values(),
                              oracle::finite_difference(layer.weights.values(), loss, kStep), kFloor));
  worst = std::max(worst, oracle::max_relative_error(
                              g.params.bias, oracle::finite_difference(layer.bias, loss, kStep), kFloor));
  worst = std::max(worst, oracle::max_relative_error(
                              g.input.values(), oracle::finite_difference(x.values(), loss, kStep), kFloor));
  return worst;
}

inline double check_dense(Rng& rng) {
  const std::size_t in = 1 + rng.below(8), out = 1 + rng.below(8);
  DenseLayer layer{oracle::random_matrix(rng, in, out), oracle::random_vector(rng, out)};
  std::vector<double> x = oracle::random_vector(rng, in);
  const std::vector<double> up = oracle::random_vector(rng, out);
  auto loss = [&] { return dot(dense_forward(layer, x), up); };
  const auto g = dense_backward(layer, x, up);
  double worst = 0.0;
  worst = std::max(worst, oracle::max_relative_error(
                              g.params.weights.values(),
                              oracle::finite_difference(layer.weights.values(), loss, kStep), kFloor));
  worst = std::max(worst, oracle::max_relative_error(
                              g.params.bias, oracle::finite_difference(layer.bias, loss, kStep), kFloor));
  worst = std::max(worst, oracle::max_relative_error(
                              g.input, oracle::finite_difference(x, loss, kStep), kFloor));
  return worst;
}

inline double check_relu(Rng& rng) {
  const std::size_t rows = 1 + rng.below(6), cols = 1 + rng.below(6);
  Matrix x(rows, cols);
  for (double& v : x.values()) {
    do {
      v = rng.uniform(-1.0, 1.0);
    } while (std::abs(v) < kKinkMargin);
  }
  const Matrix up = oracle::random_matrix(rng, rows, cols);
  auto loss = [&] { return dot(relu_forward(x).values(), up.values()); };
  const Matrix g = relu_backward(x, up);
  return oracle::max_relative_error(g.values(), oracle::finite_difference(x.values(), loss, kStep),
                                    kFloor);
}

inline double check_maxpool(Rng& rng) {
  const std::size_t rows = 1 + rng.below(8), cols = 1 + rng.below(6);
  Matrix x(rows, cols);
  // Columns are shuffled, well-separated levels so no two rows tie.
  for (std::size_t c = 0; c < cols; ++c) {
    auto perm = oracle::random_permutation(rng, rows);
    for (std::size_t r = 0; r < rows; ++r) {
      x(r, c) = static_cast<double>(perm[r]) * 0.01 + rng.uniform(0.0, 0.001);
    }
  }
  const std::vector<double> up = oracle::random_vector(rng, cols);
  auto loss = [&] { return dot(maxpool_points(x).values, up); };
  const Matrix g = maxpool_backward(maxpool_points(x), rows, up);
  return oracle::max_relative_error(g.values(), oracle::finite_difference(x.values(), loss, kStep),
                                    kFloor);
}

inline double check_chamfer(Rng& rng) {
  const std::size_t n = 1 + rng.below(16), m = 1 + rng.below(16);
  const PointCloud b = oracle::random_cloud(rng, m);
  std::vector<double> flat = oracle::random_vector(rng, 3 * n);
  auto loss = [&] { return chamfer(PointCloud::from_flat(flat), b); };
  const Matrix g = chamfer_grad(PointCloud::from_flat(flat), b);
  return oracle::max_relative_error(g.values(), oracle::finite_difference(flat, loss, kStep), kFloor);
}

// Smallest gap between the nearest and second-nearest squared distance, over
// both directions; infinity when a cloud has a single point.
inline double neighbor_margin(const PointCloud& a, const PointCloud& b) {
  double margin = std::numeric_limits<double>::infinity();
  auto scan = [&](const PointCloud& from, const PointCloud& to) {
    for (const Vec3& p : from) {
      std::vector<double> d;
      for (const Vec3& q : to) d.push_back(oracle::dist2(p, q));
      std::sort(d.begin(), d.end());
      if (d.size() > 1) margin = std::min(margin, d[1] - d[0]);
    }
  };
  scan(a, b);
  scan(b, a);
  return margin;
}

// Distance of the configuration from any point where the loss is not
// differentiable, from an independent forward pass.
inline double kink_margin(const AEModel& model, const PointCloud& cloud) {
  double margin = std::numeric_limits<double>::infinity();
  Matrix x = cloud.to_matrix();
  for (const auto& layer : model.encoder) {
    Matrix pre = oracle::affine_rows(layer.weights, layer.bias, x);
    for (double v : pre.values()) margin = std::min(margin, std::abs(v));
    for (double& v : pre.values()) v = std::max(v, 0.0);
    x = pre;
  }
  std::vector<double> z(x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    std::vector<double> col;
    for (std::size_t r = 0; r < x.rows(); ++r) col.push_back(x(r, c));
    std::sort(col.rbegin(), col.rend());
    z[c] = col[0];
    // A column that is zero everywhere has zero gradient on both sides.
    if (col.size() > 1 && col[0] > 0.0) margin = std::min(margin, col[0] - col[1]);
  }
  Matrix h(1, z.size(), z);
  for (std::size_t i = 0; i < model.decoder.size(); ++i) {
    Matrix pre = oracle::affine_rows(model.decoder[i].weights, model.decoder[i].bias, h);
    if (i + 1 < model.decoder.size()) {
      for (double v : pre.values()) margin = std::min(margin, std::abs(v));
      for (double& v : pre.values()) v = std::max(v, 0.0);
    }
    h = pre;
  }
  const PointCloud recon = PointCloud::from_flat(h.values());
  return std::min(margin, neighbor_margin(recon, cloud));
}

inline AEConfig tiny_config(std::uint64_t seed) {
  AEConfig c;
  c.input_points = 8;
  c.output_points = 8;
  c.latent_size = 4;
  c.encoder_widths = {8, 16};
  c.decoder_widths = {16, 16};
  c.seed = seed;
  return c;
}

// Relative error after discounting the rounding error of the difference
// quotient itself, about eps * |loss| / step per entry.
inline double excess_relative_error(std::span<const double> analytic,
                                    std::span<const double> numeric, double loss) {
  const double rounding = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(loss) / kStep;
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double err = std::max(0.0, std::abs(analytic[i] - numeric[i]) - rounding);
    worst = std::max(worst, err / std::max({std::abs(analytic[i]), std::abs(numeric[i]), kFloor}));
  }
  return worst;
}

// End-to-end check of the Chamfer reconstruction loss over every parameter.
// Returns nullopt when the drawn configuration is within kKinkMargin of a kink.
inline std::optional<double> check_end_to_end(Rng& rng, double* raw = nullptr) {
  AEModel model = make_model(tiny_config(rng.next_u64()));
  // Small random biases so ReLU kinks are not aligned with the origin.
  for (auto& l : model.encoder) {
    for (double& b : l.bias) b = rng.uniform(-0.1, 0.1);
  }
  for (auto& l : model.decoder) {
    for (double& b : l.bias) b = rng.uniform(-0.1, 0.1);
  }
  const PointCloud cloud = oracle::random_cloud(rng, 8);
  if (kink_margin(model, cloud) < kKinkMargin) return std::nullopt;

  const LossGradient lg = loss_and_gradient(model, cloud);
  auto loss = [&] { return chamfer(decode(model, encode(model, cloud)), cloud); };
  const auto analytic = parameter_views(lg.grads);
  auto params = parameter_views(model);
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    const auto numeric = oracle::finite_difference(params[t], loss, kStep);
    worst = std::max(worst, excess_relative_error(analytic[t], numeric, lg.loss));
    if (raw) *raw = std::max(*raw, oracle::max_relative_error(analytic[t], numeric, kFloor));
  }
  return worst;
}

}  // namespace gradcheck
