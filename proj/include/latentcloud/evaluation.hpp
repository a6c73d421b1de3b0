#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "latentcloud/autoencoder.hpp"
#include "latentcloud/data.hpp"

namespace latentcloud {

// Default auction epsilon for reported EMD values on normalized clouds.
inline constexpr double kEvalEmdEpsilon = 1e-3;

struct FamilyCentroid {
  ShapeFamily family;
  LatentVector latent;  // mean latent of the family's reference items
  PointCloud cloud;     // decode(latent)
};

// One centroid per family present among `reference` items, in first-seen
// family order.
std::vector<FamilyCentroid> family_centroids(const AEModel& model,
                                             const DatasetManifest& manifest,
                                             std::span<const PointCloud> inputs,
                                             std::span<const std::size_t> reference);

// Family of the centroid closest in Chamfer distance; ties go to the earlier
// centroid.
ShapeFamily classify(const PointCloud& cloud, std::span<const FamilyCentroid> centroids);

struct ItemEvaluation {
  std::string id;
  ShapeFamily family;
  ShapeFamily predicted;
  double chamfer = 0.0;
  double emd = 0.0;
};

struct EvalReport {
  std::vector<ItemEvaluation> items;
  double mean_chamfer = 0.0;
  double median_chamfer = 0.0;
  double mean_emd = 0.0;
  double median_emd = 0.0;
  double accuracy = 0.0;
};

// Reconstructs every item in `evaluated` and compares it with its input;
// classification uses centroids built from `reference`.
EvalReport evaluate(const AEModel& model, const DatasetManifest& manifest,
                    std::span<const PointCloud> inputs, std::span<const std::size_t> evaluated,
                    std::span<const std::size_t> reference, double emd_epsilon = kEvalEmdEpsilon);

std::string report_to_json(const EvalReport& report);

double median(std::vector<double> values);

}  // namespace latentcloud
