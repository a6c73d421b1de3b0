#include "latentcloud/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "latentcloud/error.hpp"

namespace latentcloud {

PointCloud::PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) throw DimensionError("point cloud must contain at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (double c : points_[i]) {
      if (!std::isfinite(c)) {
        throw ConfigError("point " + std::to_string(i) + " has a non-finite coordinate");
      }
    }
  }
}

PointCloud PointCloud::from_matrix(const Matrix& m) {
  if (m.cols() != 3) {
    throw DimensionError("point cloud matrix must have 3 columns, got " +
                         std::to_string(m.cols()));
  }
  std::vector<Vec3> pts(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) pts[r] = {m(r, 0), m(r, 1), m(r, 2)};
  return PointCloud(std::move(pts));
}

PointCloud PointCloud::from_flat(std::span<const double> xyz) {
  if (xyz.size() % 3 != 0) {
    throw DimensionError("flat coordinate list length " + std::to_string(xyz.size()) +
                         " is not a multiple of 3");
  }
  std::vector<Vec3> pts(xyz.size() / 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i] = {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
  }
  return PointCloud(std::move(pts));
}

Matrix PointCloud::to_matrix() const {
  Matrix m(points_.size(), 3);
  for (std::size_t r = 0; r < points_.size(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) m(r, c) = points_[r][c];
  }
  return m;
}

// --- kd-tree ---------------------------------------------------------------

SpatialIndex::SpatialIndex(const PointCloud& cloud, std::size_t leaf_size)
    : points_(cloud.points()), leaf_size_(leaf_size) {
  if (leaf_size_ == 0) throw ConfigError("spatial index leaf size must be positive");
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
  build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{-1, 0.0, begin, end, -1, -1});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  auto first = order_.begin() + begin;
  std::nth_element(first, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t x, std::uint32_t y) {
                     const double px = points_[x][axis];
                     const double py = points_[y][axis];
                     return px < py || (px == py && x < y);
                   });
  const double split = points_[order_[mid]][axis];
  // Left holds coordinates <= split, right holds coordinates >= split.
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& n = nodes_[id];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

void SpatialIndex::search(std::int32_t node_id, const Vec3& q, Neighbor& best) const {
  const Node& n = nodes_[node_id];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const std::uint32_t idx = order_[i];
      const double d = squared_distance(q, points_[idx]);
      if (d < best.squared_distance || (d == best.squared_distance && idx < best.index)) {
        best = {idx, d};
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const std::int32_t near = diff <= 0.0 ? n.left : n.right;
  const std::int32_t far = diff <= 0.0 ? n.right : n.left;
  search(near, q, best);
  // Points on the far side are at least |diff| away along the split axis. Equal
  // bounds are still visited so a smaller index at the same distance is found.
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

Neighbor SpatialIndex::nearest(const Vec3& query) const {
  Neighbor best{std::numeric_limits<std::size_t>::max(),
                std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

Neighbor brute_force_nearest(const PointCloud& cloud, const Vec3& query) {
  Neighbor best{0, squared_distance(query, cloud[0])};
  for (std::size_t i = 1; i < cloud.size(); ++i) {
    const double d = squared_distance(query, cloud[i]);
    if (d < best.squared_distance) best = {i, d};
  }
  return best;
}

std::vector<Neighbor> nearest_neighbors(const PointCloud& from, const PointCloud& to) {
  std::vector<Neighbor> out(from.size());
  if (to.size() > kIndexThreshold) {
    const SpatialIndex index(to);
    for (std::size_t i = 0; i < from.size(); ++i) out[i] = index.nearest(from[i]);
  } else {
    for (std::size_t i = 0; i < from.size(); ++i) out[i] = brute_force_nearest(to, from[i]);
  }
  return out;
}

// --- Chamfer ---------------------------------------------------------------

namespace {

double directed_sum(const std::vector<Neighbor>& nn) {
  double s = 0.0;
  for (const Neighbor& n : nn) s += n.squared_distance;
  return s;
}

}  // namespace

double chamfer(const PointCloud& a, const PointCloud& b) {
  const double ab = directed_sum(nearest_neighbors(a, b));
  const double ba = directed_sum(nearest_neighbors(b, a));
  return ab + ba;
}

ChamferResult chamfer_with_grad(const PointCloud& a, const PointCloud& b) {
  const auto a_to_b = nearest_neighbors(a, b);
  const auto b_to_a = nearest_neighbors(b, a);
  ChamferResult r{directed_sum(a_to_b) + directed_sum(b_to_a), Matrix(a.size(), 3)};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec3& q = b[a_to_b[i].index];
    for (std::size_t c = 0; c < 3; ++c) r.grad(i, c) += 2.0 * (a[i][c] - q[c]);
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    const std::size_t i = b_to_a[j].index;
    for (std::size_t c = 0; c < 3; ++c) r.grad(i, c) += 2.0 * (a[i][c] - b[j][c]);
  }
  return r;
}

Matrix chamfer_grad(const PointCloud& a, const PointCloud& b) {
  return chamfer_with_grad(a, b).grad;
}

// --- Assignments -----------------------------------------------------------

double assignment_cost(const PointCloud& a, const PointCloud& b,
                       const std::vector<std::size_t>& permutation) {
  if (a.size() != b.size() || permutation.size() != a.size()) {
    throw DimensionError("assignment cost needs equal sizes");
  }
  double cost = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cost += std::sqrt(squared_distance(a[i], b[permutation[i]]));
  }
  return cost;
}

bool is_bijection(const std::vector<std::size_t>& permutation) {
  std::vector<bool> seen(permutation.size(), false);
  for (std::size_t j : permutation) {
    if (j >= permutation.size() || seen[j]) return false;
    seen[j] = true;
  }
  return true;
}

}  // namespace latentcloud
