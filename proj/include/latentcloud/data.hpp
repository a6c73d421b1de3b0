#pragma once

// Point-cloud files, normalization and the procedural shape corpus.
//
// Text clouds: one "x y z" triple per line, '#' starts a comment, blank lines
// are ignored. Binary clouds: "PCB1", u32 little-endian point count, then the
// points as consecutive little-endian float32 triplets.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latentcloud/point_cloud.hpp"
#include "latentcloud/random.hpp"

namespace latentcloud {

// --- normalization ---------------------------------------------------------

struct Normalized {
  PointCloud cloud;
  Vec3 centroid;
  double scale = 1.0;
};

// Centers on the centroid and scales the farthest point to radius 1. A cloud
// of one repeated point keeps scale 1.
Normalized normalize(const PointCloud& cloud);
PointCloud denormalize(const PointCloud& cloud, const Vec3& centroid, double scale);

// --- file formats ----------------------------------------------------------

enum class CloudFormat { Text, Binary };

// ".pcb" is binary, anything else text.
CloudFormat format_for_path(const std::filesystem::path& path);

PointCloud parse_text_cloud(std::string_view text);
std::string format_text_cloud(const PointCloud& cloud);
PointCloud parse_binary_cloud(std::string_view bytes);
std::string format_binary_cloud(const PointCloud& cloud);

PointCloud load_cloud(const std::filesystem::path& path);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format);
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path);

// Latent files: one value per line, '#' comments allowed.
std::vector<double> parse_latent(std::string_view text);
std::string format_latent(const std::vector<double>& latent);
std::vector<double> load_latent(const std::filesystem::path& path);
void save_latent(const std::vector<double>& latent, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Shortest decimal that parses back to the same double (at most 17
// significant digits).
std::string format_double(double v);

// --- procedural shapes -----------------------------------------------------

enum class ShapeFamily { BoxChair, Table, Lamp };

std::string_view family_name(ShapeFamily f);
ShapeFamily parse_family(std::string_view name);
const std::vector<ShapeFamily>& all_families();

// Chair: y is up, the seat is centered over the origin and the back sits at
// -z. Units are meters before normalization.
struct ChairParams {
  double seat_width = 0.5;    // [0.40, 0.60]
  double seat_depth = 0.5;    // [0.40, 0.60]
  double seat_height = 0.45;  // [0.40, 0.50], top of the seat
  double leg_radius = 0.03;   // [0.02, 0.04]
  double back_height = 0.45;  // [0.30, 0.60], above the seat
  bool armrests = false;
  double armrest_height = 0.2;  // [0.15, 0.25], above the seat
};

struct TableParams {
  double top_width = 1.0;   // [0.80, 1.40]
  double top_depth = 0.7;   // [0.50, 0.90]
  double height = 0.7;      // [0.60, 0.80]
  double leg_radius = 0.03;  // [0.02, 0.05]
};

struct LampParams {
  double base_radius = 0.15;        // [0.10, 0.20]
  double pole_radius = 0.015;       // [0.01, 0.02]
  double pole_height = 0.9;         // [0.60, 1.20]
  double shade_bottom_radius = 0.2;  // [0.15, 0.30]
  double shade_top_radius = 0.08;   // [0.05, 0.12]
  double shade_height = 0.2;        // [0.15, 0.30]
};

inline constexpr double kSeatThickness = 0.05;
inline constexpr double kBackThickness = 0.04;
inline constexpr double kArmrestThickness = 0.04;
inline constexpr double kTableTopThickness = 0.04;
inline constexpr double kLampBaseThickness = 0.03;

struct ShapeParams {
  ShapeFamily family = ShapeFamily::BoxChair;
  ChairParams chair;
  TableParams table;
  LampParams lamp;

  static ShapeParams make(const ChairParams& p);
  static ShapeParams make(const TableParams& p);
  static ShapeParams make(const LampParams& p);
  // Uniform draw from the documented ranges; chairs get armrests half the time.
  static ShapeParams sample(ShapeFamily family, Rng& rng);

  void validate() const;
};

// n points sampled uniformly by area over the family's surfaces.
PointCloud generate_shape(const ShapeParams& params, std::size_t n, std::uint64_t seed);

// --- dataset ---------------------------------------------------------------

inline constexpr std::string_view kNormalizationMode = "centroid-unit-radius";
inline constexpr std::string_view kManifestFileName = "manifest.json";

struct ManifestEntry {
  std::string id;
  ShapeFamily family = ShapeFamily::BoxChair;
  std::string path;  // relative to the manifest's directory
  std::size_t points = 0;
  std::uint64_t seed = 0;
  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::string normalization = std::string(kNormalizationMode);
  std::size_t point_count = 0;
  std::uint64_t seed = 0;
  std::vector<ShapeFamily> families;
  std::vector<ManifestEntry> entries;
  std::filesystem::path root;  // directory holding the manifest; not serialized

  std::filesystem::path entry_path(const ManifestEntry& e) const { return root / e.path; }
  const ManifestEntry* find(std::string_view id) const;
  bool operator==(const DatasetManifest& o) const {
    return normalization == o.normalization && point_count == o.point_count &&
           seed == o.seed && families == o.families && entries == o.entries;
  }
};

struct DatasetSpec {
  // Entry i belongs to families[i % families.size()].
  std::vector<ShapeFamily> families = all_families();
  std::size_t count = 200;
  std::size_t points = 2048;
  std::uint64_t seed = 0;
};

// Writes one binary cloud per entry plus manifest.json into out_dir.
DatasetManifest build_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir);

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(std::string_view text, const std::filesystem::path& root);
// Accepts the manifest file or the directory containing it. Verifies that
// every entry loads with the declared point count.
DatasetManifest load_manifest(const std::filesystem::path& path);

// Raw clouds as stored on disk, in manifest order.
std::vector<PointCloud> load_dataset_clouds(const DatasetManifest& manifest);
// Normalized clouds, the form the model is trained and queried on.
std::vector<PointCloud> load_model_inputs(const DatasetManifest& manifest);

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded shuffle of manifest order; the first round(fraction * n) indices go
// to validation, at most n - 1 of them. Both lists are returned sorted.
DatasetSplit split_dataset(std::size_t count, double validation_fraction, std::uint64_t seed);

}  // namespace latentcloud
