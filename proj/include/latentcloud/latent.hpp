#pragma once

// Latent-space workflows: feature editing (x = f + t, with t driven by eight
// sliders and eight fine-tune knobs) and interpolation between several models
// (h = normalized(w) * V).

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "latentcloud/autoencoder.hpp"

namespace latentcloud {

struct LatentStats {
  std::vector<double> min;
  std::vector<double> max;
  std::size_t count = 0;

  std::size_t size() const { return min.size(); }
  bool operator==(const LatentStats&) const = default;
};

inline constexpr std::size_t kControlCount = 8;
inline constexpr double kSliderLimit = 1.0;
inline constexpr double kKnobLimit = 0.1;

using SliderValues = std::array<double, kControlCount>;

LatentVector feature_edit(std::span<const double> base, std::span<const double> transform);

// Rows of `latents` are the models' latent vectors; weights must be
// non-negative with a positive sum and are L1-normalized.
LatentVector interpolate(std::span<const LatentVector> latents, std::span<const double> weights);

LatentStats latent_stats(std::span<const LatentVector> latents);

// t[offset + j] = (sliders[j] + knobs[j]) * (max - min)[offset + j] / 2, zero
// elsewhere. Sliders lie in [-1, 1], knobs in [-0.1, 0.1].
LatentVector slider_to_t(const LatentStats& stats, std::span<const double> sliders,
                         std::span<const double> knobs, std::size_t offset);

struct EditState {
  LatentVector base;
  LatentVector transform;
  LatentVector edited;

  explicit EditState(LatentVector f);
  void set_transform(LatentVector t);
};

}  // namespace latentcloud
