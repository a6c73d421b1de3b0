#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "latentcloud/nn.hpp"

namespace latentcloud {

using Vec3 = std::array<double, 3>;

// Non-empty set of finite 3D points. Point order carries no meaning for the
// metrics or the encoder, but it is preserved.
class PointCloud {
 public:
  explicit PointCloud(std::vector<Vec3> points);
  // rows x 3 matrix.
  static PointCloud from_matrix(const Matrix& m);
  // Flat x0 y0 z0 x1 ... layout; length must be a multiple of 3.
  static PointCloud from_flat(std::span<const double> xyz);

  std::size_t size() const { return points_.size(); }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Vec3>& points() const { return points_; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  Matrix to_matrix() const;

  bool operator==(const PointCloud&) const = default;

 private:
  std::vector<Vec3> points_;
};

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace latentcloud
