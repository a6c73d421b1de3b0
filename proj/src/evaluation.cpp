#include "latentcloud/evaluation.hpp"

#include <algorithm>

#include <json.hpp>

#include "latentcloud/error.hpp"
#include "latentcloud/metrics.hpp"

namespace latentcloud {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<FamilyCentroid> family_centroids(const AEModel& model,
                                             const DatasetManifest& manifest,
                                             std::span<const PointCloud> inputs,
                                             std::span<const std::size_t> reference) {
  if (inputs.size() != manifest.entries.size()) {
    throw DimensionError("inputs do not match manifest entries");
  }
  std::vector<ShapeFamily> order;
  std::vector<LatentVector> sums;
  std::vector<std::size_t> counts;
  for (std::size_t idx : reference) {
    const ShapeFamily f = manifest.entries.at(idx).family;
    auto it = std::find(order.begin(), order.end(), f);
    std::size_t slot = static_cast<std::size_t>(it - order.begin());
    if (it == order.end()) {
      order.push_back(f);
      sums.emplace_back(model.config.latent_size, 0.0);
      counts.push_back(0);
    }
    const LatentVector z = encode(model, inputs[idx]);
    for (std::size_t j = 0; j < z.size(); ++j) sums[slot][j] += z[j];
    counts[slot] += 1;
  }
  std::vector<FamilyCentroid> out;
  for (std::size_t s = 0; s < order.size(); ++s) {
    for (double& v : sums[s]) v /= static_cast<double>(counts[s]);
    PointCloud cloud = decode(model, sums[s]);
    out.push_back({order[s], std::move(sums[s]), std::move(cloud)});
  }
  return out;
}

ShapeFamily classify(const PointCloud& cloud, std::span<const FamilyCentroid> centroids) {
  if (centroids.empty()) throw DimensionError("classification needs at least one centroid");
  std::size_t best = 0;
  double best_distance = chamfer(cloud, centroids[0].cloud);
  for (std::size_t i = 1; i < centroids.size(); ++i) {
    const double d = chamfer(cloud, centroids[i].cloud);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return centroids[best].family;
}

EvalReport evaluate(const AEModel& model, const DatasetManifest& manifest,
                    std::span<const PointCloud> inputs, std::span<const std::size_t> evaluated,
                    std::span<const std::size_t> reference, double emd_epsilon) {
  if (evaluated.empty()) throw DimensionError("nothing to evaluate");
  if (manifest.point_count != model.config.input_points) {
    throw DimensionError("model expects " + std::to_string(model.config.input_points) +
                         " points, dataset has " + std::to_string(manifest.point_count));
  }
  const auto centroids = family_centroids(model, manifest, inputs, reference);
  EvalReport report;
  std::vector<double> chamfers, emds;
  std::size_t correct = 0;
  for (std::size_t idx : evaluated) {
    const auto& entry = manifest.entries.at(idx);
    const PointCloud recon = decode(model, encode(model, inputs[idx]));
    ItemEvaluation item{entry.id, entry.family, classify(recon, centroids),
                        chamfer(recon, inputs[idx]), 0.0};
    if (recon.size() == inputs[idx].size()) {
      item.emd = emd_approx(recon, inputs[idx], emd_epsilon).cost;
    }
    if (item.predicted == item.family) ++correct;
    chamfers.push_back(item.chamfer);
    emds.push_back(item.emd);
    report.items.push_back(std::move(item));
  }
  const double n = static_cast<double>(evaluated.size());
  for (double c : chamfers) report.mean_chamfer += c;
  for (double e : emds) report.mean_emd += e;
  report.mean_chamfer /= n;
  report.mean_emd /= n;
  report.median_chamfer = median(chamfers);
  report.median_emd = median(emds);
  report.accuracy = static_cast<double>(correct) / n;
  return report;
}

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["count"] = r.items.size();
  j["mean_chamfer"] = r.mean_chamfer;
  j["median_chamfer"] = r.median_chamfer;
  j["mean_emd_approx"] = r.mean_emd;
  j["median_emd_approx"] = r.median_emd;
  j["family_accuracy"] = r.accuracy;
  auto& items = j["items"] = nlohmann::ordered_json::array();
  for (const auto& it : r.items) {
    items.push_back({{"id", it.id},
                     {"family", std::string(family_name(it.family))},
                     {"predicted", std::string(family_name(it.predicted))},
                     {"chamfer", it.chamfer},
                     {"emd_approx", it.emd}});
  }
  return j.dump(2) + "\n";
}

}  // namespace latentcloud
