#include "latentcloud/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "latentcloud/error.hpp"
#include "latentcloud/metrics.hpp"

namespace latentcloud {

std::vector<std::size_t> AEConfig::encoder_chain() const {
  std::vector<std::size_t> chain{3};
  chain.insert(chain.end(), encoder_widths.begin(), encoder_widths.end());
  chain.push_back(latent_size);
  return chain;
}

std::vector<std::size_t> AEConfig::decoder_chain() const {
  std::vector<std::size_t> chain{latent_size};
  chain.insert(chain.end(), decoder_widths.begin(), decoder_widths.end());
  chain.push_back(output_points * 3);
  return chain;
}

void AEConfig::validate() const {
  if (input_points == 0) throw ConfigError("input point count must be positive");
  if (output_points == 0) throw ConfigError("output point count must be positive");
  if (latent_size == 0) throw ConfigError("latent size must be positive");
  for (std::size_t i = 0; i < encoder_widths.size(); ++i) {
    if (encoder_widths[i] == 0) throw ConfigError("encoder widths must be positive");
    if (i > 0 && encoder_widths[i] <= encoder_widths[i - 1]) {
      throw ConfigError("encoder widths must be strictly increasing");
    }
  }
  for (std::size_t w : decoder_widths) {
    if (w == 0) throw ConfigError("decoder widths must be positive");
  }
}

AEModel make_model(const AEConfig& config) {
  config.validate();
  AEModel model;
  model.config = config;
  Rng rng(config.seed);
  const auto enc = config.encoder_chain();
  for (std::size_t i = 0; i + 1 < enc.size(); ++i) {
    model.encoder.push_back(init_pointwise_conv(enc[i], enc[i + 1], rng));
  }
  const auto dec = config.decoder_chain();
  for (std::size_t i = 0; i + 1 < dec.size(); ++i) {
    model.decoder.push_back(init_dense(dec[i], dec[i + 1], rng));
  }
  return model;
}

namespace {

template <typename Model, typename Span>
std::vector<Span> views_of(Model& m) {
  std::vector<Span> out;
  for (auto& l : m.encoder) {
    out.emplace_back(l.weights.values());
    out.emplace_back(l.bias);
  }
  for (auto& l : m.decoder) {
    out.emplace_back(l.weights.values());
    out.emplace_back(l.bias);
  }
  return out;
}

void check_input(const AEModel& model, const PointCloud& cloud) {
  if (cloud.size() != model.config.input_points) {
    throw DimensionError("model expects clouds of " +
                         std::to_string(model.config.input_points) + " points, got " +
                         std::to_string(cloud.size()));
  }
}

void check_latent(const AEModel& model, std::span<const double> latent) {
  if (latent.size() != model.config.latent_size) {
    throw DimensionError("model expects latent vectors of length " +
                         std::to_string(model.config.latent_size) + ", got " +
                         std::to_string(latent.size()));
  }
}

struct EncoderTrace {
  std::vector<Matrix> inputs;       // input to each conv layer
  std::vector<Matrix> activations;  // conv output before ReLU
  PoolResult pool;
};

struct DecoderTrace {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> activations;  // dense output before ReLU
  std::vector<double> output;
};

EncoderTrace run_encoder(const AEModel& model, const PointCloud& cloud) {
  EncoderTrace t;
  Matrix x = cloud.to_matrix();
  for (const auto& layer : model.encoder) {
    Matrix pre = pointwise_conv_forward(layer, x);
    Matrix post = relu_forward(pre);
    t.inputs.push_back(std::move(x));
    t.activations.push_back(std::move(pre));
    x = std::move(post);
  }
  t.pool = maxpool_points(x);
  return t;
}

DecoderTrace run_decoder(const AEModel& model, std::span<const double> latent) {
  DecoderTrace t;
  std::vector<double> x(latent.begin(), latent.end());
  for (std::size_t i = 0; i < model.decoder.size(); ++i) {
    std::vector<double> pre = dense_forward(model.decoder[i], x);
    t.inputs.push_back(std::move(x));
    if (i + 1 == model.decoder.size()) {
      t.output = std::move(pre);
      break;
    }
    x = relu_forward(pre);
    t.activations.push_back(std::move(pre));
  }
  return t;
}

}  // namespace

std::vector<std::span<double>> parameter_views(AEModel& model) {
  return views_of<AEModel, std::span<double>>(model);
}

std::vector<std::span<const double>> parameter_views(const AEModel& model) {
  return views_of<const AEModel, std::span<const double>>(model);
}

std::vector<std::span<const double>> parameter_views(const ModelGradients& grads) {
  return views_of<const ModelGradients, std::span<const double>>(grads);
}

LatentVector encode(const AEModel& model, const PointCloud& cloud) {
  check_input(model, cloud);
  Matrix x = cloud.to_matrix();
  for (const auto& layer : model.encoder) x = relu_forward(pointwise_conv_forward(layer, x));
  return maxpool_points(x).values;
}

PointCloud decode(const AEModel& model, std::span<const double> latent) {
  check_latent(model, latent);
  for (double v : latent) {
    if (!std::isfinite(v)) throw ConfigError("latent vector has a non-finite value");
  }
  return PointCloud::from_flat(run_decoder(model, latent).output);
}

ModelGradients zero_gradients(const AEModel& model) {
  ModelGradients g;
  for (const auto& l : model.encoder) {
    g.encoder.push_back({Matrix(l.in_features(), l.out_features()),
                         std::vector<double>(l.out_features(), 0.0)});
  }
  for (const auto& l : model.decoder) {
    g.decoder.push_back({Matrix(l.in_features(), l.out_features()),
                         std::vector<double>(l.out_features(), 0.0)});
  }
  return g;
}

LossGradient loss_and_gradient(const AEModel& model, const PointCloud& cloud) {
  check_input(model, cloud);
  const EncoderTrace enc = run_encoder(model, cloud);
  const DecoderTrace dec = run_decoder(model, enc.pool.values);
  const PointCloud reconstruction = PointCloud::from_flat(dec.output);
  ChamferResult cd = chamfer_with_grad(reconstruction, cloud);

  LossGradient out{cd.value, {}};
  out.grads.decoder.resize(model.decoder.size());
  out.grads.encoder.resize(model.encoder.size());

  std::vector<double> upstream(cd.grad.values().begin(), cd.grad.values().end());
  for (std::size_t i = model.decoder.size(); i-- > 0;) {
    if (i + 1 < model.decoder.size()) upstream = relu_backward(dec.activations[i], upstream);
    DenseGradients g = dense_backward(model.decoder[i], dec.inputs[i], upstream);
    out.grads.decoder[i] = std::move(g.params);
    upstream = std::move(g.input);
  }

  Matrix feature_grad =
      maxpool_backward(enc.pool, enc.activations.back().rows(), upstream);
  for (std::size_t i = model.encoder.size(); i-- > 0;) {
    feature_grad = relu_backward(enc.activations[i], feature_grad);
    auto g = pointwise_conv_backward(model.encoder[i], enc.inputs[i], feature_grad);
    out.grads.encoder[i] = std::move(g.params);
    feature_grad = std::move(g.input);
  }
  return out;
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(adam.learning_rate > 0.0) || !std::isfinite(adam.learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (loss != "chamfer") throw ConfigError("unsupported loss '" + loss + "'");
}

namespace {

void accumulate(std::vector<std::span<double>>& acc,
                const std::vector<std::span<const double>>& g) {
  for (std::size_t t = 0; t < acc.size(); ++t) {
    for (std::size_t i = 0; i < acc[t].size(); ++i) acc[t][i] += g[t][i];
  }
}

}  // namespace

TrainResult train(AEModel& model, std::span<const PointCloud> dataset, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  for (const PointCloud& c : dataset) check_input(model, c);
  TrainResult result;
  if (cfg.epochs == 0) return result;
  if (dataset.empty()) throw DimensionError("cannot train on an empty dataset");

  std::vector<std::size_t> sizes;
  for (auto v : parameter_views(std::as_const(model))) sizes.push_back(v.size());
  OptimizerState optimizer = make_optimizer_state(cfg.adam, sizes);

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      ModelGradients batch = zero_gradients(model);
      auto batch_views = views_of<ModelGradients, std::span<double>>(batch);
      for (std::size_t k = start; k < stop; ++k) {
        LossGradient lg;
        try {
          lg = loss_and_gradient(model, dataset[order[k]]);
        } catch (const ConfigError&) {
          // inputs are already validated, so this is a non-finite reconstruction
          throw DivergenceError("training diverged: non-finite reconstruction at epoch " +
                                    std::to_string(epoch),
                                epoch);
        }
        loss_sum += lg.loss;
        accumulate(batch_views, parameter_views(lg.grads));
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (auto& v : batch_views) {
        for (double& g : v) g *= scale;
      }
      const auto params = parameter_views(model);
      const auto grads = parameter_views(std::as_const(batch));
      adam_step(optimizer, params, grads);
      for (const auto& v : params) {
        for (double x : v) {
          if (!std::isfinite(x)) {
            throw DivergenceError("training diverged: non-finite parameters at epoch " +
                                      std::to_string(epoch),
                                  epoch);
          }
        }
      }
    }
    const double mean = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(mean)) {
      throw DivergenceError("training diverged: non-finite loss at epoch " +
                                std::to_string(epoch),
                            epoch);
    }
    result.loss_history.push_back(mean);
    model.metadata.epochs_trained += 1;
    model.metadata.final_loss = mean;
    if (hooks.on_epoch) hooks.on_epoch({epoch, mean}, model);
    if (cfg.checkpoint_interval > 0 && (epoch + 1) % cfg.checkpoint_interval == 0 &&
        hooks.on_checkpoint) {
      hooks.on_checkpoint(epoch + 1, model);
    }
  }
  return result;
}

}  // namespace latentcloud
