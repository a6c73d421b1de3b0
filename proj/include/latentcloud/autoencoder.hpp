#pragma once

// Point-cloud autoencoder.
//
// Encoder: pointwise conv + ReLU blocks 3 -> w0 -> ... -> w_last -> k, then a
// column-wise max over points gives the k-dimensional latent vector.
// Decoder: dense k -> h0 -> h1 (ReLU after each) -> M*3 (linear), reshaped to
// an M x 3 cloud.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "latentcloud/nn.hpp"
#include "latentcloud/point_cloud.hpp"

namespace latentcloud {

using LatentVector = std::vector<double>;

struct AEConfig {
  std::size_t input_points = 2048;
  std::size_t latent_size = 32;
  // Hidden conv widths; the final projection to latent_size is appended.
  std::vector<std::size_t> encoder_widths = {64, 128, 256};
  std::vector<std::size_t> decoder_widths = {256, 512};
  std::size_t output_points = 2048;
  std::uint64_t seed = 0;

  // Full conv chain including the input width 3 and the latent width.
  std::vector<std::size_t> encoder_chain() const;
  std::vector<std::size_t> decoder_chain() const;
  void validate() const;
  bool operator==(const AEConfig&) const = default;
};

struct TrainingMetadata {
  std::size_t epochs_trained = 0;
  double final_loss = 0.0;
  // How the dataset was split into train / validation for this model.
  std::uint64_t split_seed = 0;
  double validation_fraction = 0.0;
  bool operator==(const TrainingMetadata&) const = default;
};

struct AEModel {
  AEConfig config;
  std::vector<PointwiseConvLayer> encoder;
  std::vector<DenseLayer> decoder;
  TrainingMetadata metadata;

  bool operator==(const AEModel&) const = default;
};

// Seeded initialization of every layer from config.seed.
AEModel make_model(const AEConfig& config);

// Parameter tensors in declared order: for each encoder layer W then b, then
// for each decoder layer W then b.
std::vector<std::span<double>> parameter_views(AEModel& model);
std::vector<std::span<const double>> parameter_views(const AEModel& model);

LatentVector encode(const AEModel& model, const PointCloud& cloud);
PointCloud decode(const AEModel& model, std::span<const double> latent);

// Same shapes as the model's layers, holding loss gradients.
struct ModelGradients {
  std::vector<PointwiseConvLayer> encoder;
  std::vector<DenseLayer> decoder;
};
ModelGradients zero_gradients(const AEModel& model);
std::vector<std::span<const double>> parameter_views(const ModelGradients& grads);

struct LossGradient {
  double loss = 0.0;  // chamfer(decode(encode(cloud)), cloud)
  ModelGradients grads;
};
LossGradient loss_and_gradient(const AEModel& model, const PointCloud& cloud);

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 16;
  AdamConfig adam;
  std::uint64_t seed = 0;
  // Only the Chamfer loss is implemented.
  std::string loss = "chamfer";
  // 0 disables checkpoint callbacks.
  std::size_t checkpoint_interval = 0;

  void validate() const;
};

struct EpochReport {
  std::size_t epoch = 0;  // 0-based
  double mean_loss = 0.0;
};

struct TrainHooks {
  // Called after each epoch with the updated model.
  std::function<void(const EpochReport&, const AEModel&)> on_epoch;
  // Called every checkpoint_interval epochs.
  std::function<void(std::size_t epochs_done, const AEModel&)> on_checkpoint;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean Chamfer per epoch
};

// Mini-batch Adam on the mean Chamfer loss. Each epoch visits the dataset in a
// seeded shuffled order; the recorded loss is the mean of the per-cloud losses
// evaluated during that epoch.
TrainResult train(AEModel& model, std::span<const PointCloud> dataset, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const AEModel& model, const std::filesystem::path& path);
AEModel load_model(const std::filesystem::path& path);

// Byte-level encoding used by save_model / load_model.
std::string serialize_model(const AEModel& model);
AEModel deserialize_model(std::string_view bytes);

}  // namespace latentcloud
