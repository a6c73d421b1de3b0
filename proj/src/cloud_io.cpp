#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "latentcloud/data.hpp"
#include "latentcloud/error.hpp"

namespace latentcloud {

namespace {

constexpr char kCloudMagic[4] = {'P', 'C', 'B', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary cloud I/O assumes a little-endian host");

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits into lines and drops comments and blank lines; calls fn(line, lineno).
template <typename Fn>
void for_each_content_line(std::string_view text, Fn&& fn) {
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) fn(line, lineno);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

double parse_number(std::string_view token, std::size_t lineno) {
  double v = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(lineno) + ": invalid number '" +
                         std::string(token) + "'",
                     lineno);
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

Normalized normalize(const PointCloud& cloud) {
  Vec3 c{0.0, 0.0, 0.0};
  for (const Vec3& p : cloud) {
    for (int a = 0; a < 3; ++a) c[a] += p[a];
  }
  const double n = static_cast<double>(cloud.size());
  for (int a = 0; a < 3; ++a) c[a] /= n;
  double radius = 0.0;
  for (const Vec3& p : cloud) radius = std::max(radius, squared_distance(p, c));
  radius = std::sqrt(radius);
  const double scale = radius > 0.0 ? radius : 1.0;
  std::vector<Vec3> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) out[i][a] = (cloud[i][a] - c[a]) / scale;
  }
  return {PointCloud(std::move(out)), c, scale};
}

PointCloud denormalize(const PointCloud& cloud, const Vec3& centroid, double scale) {
  std::vector<Vec3> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < 3; ++a) out[i][a] = cloud[i][a] * scale + centroid[a];
  }
  return PointCloud(std::move(out));
}

CloudFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".pcb" ? CloudFormat::Binary : CloudFormat::Text;
}

PointCloud parse_text_cloud(std::string_view text) {
  std::vector<Vec3> points;
  for_each_content_line(text, [&](std::string_view line, std::size_t lineno) {
    Vec3 p{};
    std::size_t count = 0;
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t", pos);
      if (start == std::string_view::npos) break;
      auto stop = line.find_first_of(" \t", start);
      if (stop == std::string_view::npos) stop = line.size();
      if (count == 3) {
        throw ParseError("line " + std::to_string(lineno) + ": expected 3 coordinates, got more",
                         lineno);
      }
      p[count++] = parse_number(line.substr(start, stop - start), lineno);
      pos = stop;
    }
    if (count != 3) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 3 coordinates, got " +
                           std::to_string(count),
                       lineno);
    }
    points.push_back(p);
  });
  if (points.empty()) throw DimensionError("point cloud file contains no points");
  return PointCloud(std::move(points));
}

std::string format_text_cloud(const PointCloud& cloud) {
  std::string out;
  for (const Vec3& p : cloud) {
    out += format_double(p[0]);
    out += ' ';
    out += format_double(p[1]);
    out += ' ';
    out += format_double(p[2]);
    out += '\n';
  }
  return out;
}

PointCloud parse_binary_cloud(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCloudMagic, 4) != 0) {
    throw BadMagicError("not a binary point cloud: missing PCB1 magic at offset 0");
  }
  if (bytes.size() < 8) throw TruncatedError("binary point cloud truncated at offset 4 (count)");
  std::uint32_t count = 0;
  for (int i = 0; i < 4; ++i) {
    count |= std::uint32_t(static_cast<unsigned char>(bytes[4 + i])) << (8 * i);
  }
  if (count == 0) throw DimensionError("binary point cloud declares zero points");
  const std::size_t need = 8 + std::size_t{count} * 12;
  if (bytes.size() < need) {
    throw TruncatedError("binary point cloud truncated at offset " + std::to_string(bytes.size()) +
                         ": " + std::to_string(count) + " points need " + std::to_string(need) +
                         " bytes");
  }
  if (bytes.size() > need) {
    throw FormatError("binary point cloud has trailing bytes at offset " + std::to_string(need));
  }
  std::vector<Vec3> points(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (int a = 0; a < 3; ++a) {
      float f = 0.0f;
      std::memcpy(&f, bytes.data() + 8 + 12 * i + 4 * a, 4);
      if (!std::isfinite(f)) {
        throw FormatError("non-finite coordinate at offset " +
                          std::to_string(8 + 12 * i + 4 * a));
      }
      points[i][a] = f;
    }
  }
  return PointCloud(std::move(points));
}

std::string format_binary_cloud(const PointCloud& cloud) {
  std::string out(kCloudMagic, 4);
  const auto count = static_cast<std::uint32_t>(cloud.size());
  for (int i = 0; i < 4; ++i) out += static_cast<char>((count >> (8 * i)) & 0xFF);
  for (const Vec3& p : cloud) {
    for (int a = 0; a < 3; ++a) {
      const float f = static_cast<float>(p[a]);
      char b[4];
      std::memcpy(b, &f, 4);
      out.append(b, 4);
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

PointCloud load_cloud(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  return format_for_path(path) == CloudFormat::Binary ? parse_binary_cloud(bytes)
                                                      : parse_text_cloud(bytes);
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, CloudFormat format) {
  write_file(path, format == CloudFormat::Binary ? format_binary_cloud(cloud)
                                                 : format_text_cloud(cloud));
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  save_cloud(cloud, path, format_for_path(path));
}

std::vector<double> parse_latent(std::string_view text) {
  std::vector<double> out;
  for_each_content_line(text, [&](std::string_view line, std::size_t lineno) {
    out.push_back(parse_number(line, lineno));
  });
  if (out.empty()) throw DimensionError("latent file contains no values");
  return out;
}

std::string format_latent(const std::vector<double>& latent) {
  std::string out;
  for (double v : latent) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

std::vector<double> load_latent(const std::filesystem::path& path) {
  return parse_latent(read_file(path));
}

void save_latent(const std::vector<double>& latent, const std::filesystem::path& path) {
  write_file(path, format_latent(latent));
}

}  // namespace latentcloud
