#include "latentcloud/latent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "latentcloud/error.hpp"

namespace latentcloud {

LatentVector feature_edit(std::span<const double> base, std::span<const double> transform) {
  if (base.size() != transform.size()) {
    throw DimensionError("feature edit: base has length " + std::to_string(base.size()) +
                         ", transform has length " + std::to_string(transform.size()));
  }
  LatentVector x(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) x[i] = base[i] + transform[i];
  return x;
}

LatentVector interpolate(std::span<const LatentVector> latents, std::span<const double> weights) {
  if (latents.size() < 2) {
    throw DimensionError("interpolation needs at least two latent vectors");
  }
  if (weights.size() != latents.size()) {
    throw DimensionError("interpolation: " + std::to_string(latents.size()) +
                         " latents but " + std::to_string(weights.size()) + " weights");
  }
  const std::size_t k = latents.front().size();
  for (const auto& v : latents) {
    if (v.size() != k) throw DimensionError("interpolation: latent lengths differ");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw DegenerateWeightsError("interpolation weights must be finite and non-negative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw DegenerateWeightsError("interpolation weights sum to zero");

  // Zero-weight rows are skipped so a one-hot weight reproduces its row exactly.
  LatentVector h;
  for (std::size_t i = 0; i < latents.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const double share = weights[i] / total;
    if (h.empty()) {
      h.resize(k);
      for (std::size_t j = 0; j < k; ++j) h[j] = share * latents[i][j];
    } else {
      for (std::size_t j = 0; j < k; ++j) h[j] += share * latents[i][j];
    }
  }
  return h;
}

LatentStats latent_stats(std::span<const LatentVector> latents) {
  if (latents.empty()) throw DimensionError("latent statistics need at least one latent");
  LatentStats s{latents.front(), latents.front(), latents.size()};
  for (const auto& v : latents) {
    if (v.size() != s.min.size()) throw DimensionError("latent lengths differ");
    for (std::size_t j = 0; j < v.size(); ++j) {
      s.min[j] = std::min(s.min[j], v[j]);
      s.max[j] = std::max(s.max[j], v[j]);
    }
  }
  return s;
}

LatentVector slider_to_t(const LatentStats& stats, std::span<const double> sliders,
                         std::span<const double> knobs, std::size_t offset) {
  if (sliders.size() != kControlCount || knobs.size() != kControlCount) {
    throw DimensionError("expected " + std::to_string(kControlCount) +
                         " sliders and knobs, got " + std::to_string(sliders.size()) +
                         " and " + std::to_string(knobs.size()));
  }
  const std::size_t k = stats.size();
  if (offset > k || k - offset < kControlCount) {
    throw DimensionError("control offset " + std::to_string(offset) +
                         " out of range for latent size " + std::to_string(k) +
                         " (max " + std::to_string(k >= kControlCount ? k - kControlCount : 0) +
                         ")");
  }
  for (std::size_t j = 0; j < kControlCount; ++j) {
    if (!(std::abs(sliders[j]) <= kSliderLimit)) {
      throw ConfigError("slider " + std::to_string(j) + " outside [-1, 1]");
    }
    if (!(std::abs(knobs[j]) <= kKnobLimit)) {
      throw ConfigError("knob " + std::to_string(j) + " outside [-0.1, 0.1]");
    }
  }
  LatentVector t(k, 0.0);
  for (std::size_t j = 0; j < kControlCount; ++j) {
    const std::size_t d = offset + j;
    t[d] = (sliders[j] + knobs[j]) * (stats.max[d] - stats.min[d]) / 2.0;
  }
  return t;
}

EditState::EditState(LatentVector f)
    : base(std::move(f)), transform(base.size(), 0.0), edited(base) {}

void EditState::set_transform(LatentVector t) {
  edited = feature_edit(base, t);
  transform = std::move(t);
}

}  // namespace latentcloud
