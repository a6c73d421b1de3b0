#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <string>

#include <json.hpp>

#include "latentcloud/data.hpp"
#include "latentcloud/error.hpp"

namespace latentcloud {

namespace fs = std::filesystem;

const ManifestEntry* DatasetManifest::find(std::string_view id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

DatasetManifest build_dataset(const DatasetSpec& spec, const fs::path& out_dir) {
  if (spec.count == 0) throw ConfigError("dataset count must be at least 1");
  if (spec.points == 0) throw ConfigError("dataset point count must be at least 1");
  if (spec.families.empty()) throw ConfigError("dataset needs at least one shape family");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw IoError("cannot create dataset directory " + out_dir.string());
  }

  DatasetManifest manifest;
  manifest.point_count = spec.points;
  manifest.seed = spec.seed;
  manifest.families = spec.families;
  manifest.root = out_dir;

  Rng master(spec.seed);
  std::vector<std::size_t> per_family(spec.families.size(), 0);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const std::size_t slot = i % spec.families.size();
    const ShapeFamily family = spec.families[slot];
    const std::uint64_t seed = master.next_u64();
    Rng rng(seed);
    const ShapeParams params = ShapeParams::sample(family, rng);
    const PointCloud cloud = generate_shape(params, spec.points, seed);

    char id[64];
    std::snprintf(id, sizeof(id), "%s-%04zu", std::string(family_name(family)).c_str(),
                  per_family[slot]++);
    ManifestEntry e{id, family, std::string(id) + ".pcb", spec.points, seed};
    save_cloud(cloud, out_dir / e.path, CloudFormat::Binary);
    manifest.entries.push_back(std::move(e));
  }
  write_file(out_dir / kManifestFileName, manifest_to_json(manifest));
  return manifest;
}

std::string manifest_to_json(const DatasetManifest& m) {
  nlohmann::ordered_json j;
  j["format"] = "latentcloud-dataset";
  j["version"] = 1;
  j["normalization"] = m.normalization;
  j["point_count"] = m.point_count;
  j["seed"] = m.seed;
  auto& fams = j["families"] = nlohmann::ordered_json::array();
  for (ShapeFamily f : m.families) fams.push_back(std::string(family_name(f)));
  auto& entries = j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"id", e.id},
                       {"family", std::string(family_name(e.family))},
                       {"path", e.path},
                       {"points", e.points},
                       {"seed", e.seed}});
  }
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text, const fs::path& root) {
  DatasetManifest m;
  m.root = root;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("format", std::string()) != "latentcloud-dataset") {
      throw FormatError("manifest is not a latentcloud dataset");
    }
    if (j.at("version").get<int>() != 1) {
      throw VersionError("unsupported manifest version " + j.at("version").dump());
    }
    m.normalization = j.at("normalization").get<std::string>();
    if (m.normalization != kNormalizationMode) {
      throw FormatError("unsupported normalization mode '" + m.normalization + "'");
    }
    m.point_count = j.at("point_count").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& f : j.at("families")) m.families.push_back(parse_family(f.get<std::string>()));
    std::set<std::string> ids;
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry{e.at("id").get<std::string>(),
                          parse_family(e.at("family").get<std::string>()),
                          e.at("path").get<std::string>(), e.at("points").get<std::size_t>(),
                          e.at("seed").get<std::uint64_t>()};
      if (!ids.insert(entry.id).second) throw FormatError("duplicate manifest id '" + entry.id + "'");
      if (entry.points != m.point_count) {
        throw DimensionError("manifest entry '" + entry.id + "' has " +
                             std::to_string(entry.points) + " points, dataset declares " +
                             std::to_string(m.point_count));
      }
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  if (m.entries.empty()) throw DimensionError("manifest has no entries");
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / kManifestFileName : path;
  DatasetManifest m = manifest_from_json(read_file(file), file.parent_path());
  for (const auto& e : m.entries) {
    const PointCloud c = load_cloud(m.entry_path(e));
    if (c.size() != e.points) {
      throw DimensionError("cloud '" + e.id + "' has " + std::to_string(c.size()) +
                           " points, manifest declares " + std::to_string(e.points));
    }
  }
  return m;
}

std::vector<PointCloud> load_dataset_clouds(const DatasetManifest& manifest) {
  std::vector<PointCloud> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) out.push_back(load_cloud(manifest.entry_path(e)));
  return out;
}

std::vector<PointCloud> load_model_inputs(const DatasetManifest& manifest) {
  std::vector<PointCloud> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) {
    out.push_back(normalize(load_cloud(manifest.entry_path(e))).cloud);
  }
  return out;
}

DatasetSplit split_dataset(std::size_t count, double validation_fraction, std::uint64_t seed) {
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::size_t n_val = static_cast<std::size_t>(std::llround(validation_fraction * count));
  if (count > 0) n_val = std::min(n_val, count - 1);
  DatasetSplit s;
  s.validation.assign(order.begin(), order.begin() + n_val);
  s.train.assign(order.begin() + n_val, order.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

}  // namespace latentcloud
