#pragma once

// Permutation-invariant distances between point clouds.
//
// Chamfer distance uses squared Euclidean distances and is summed (not
// averaged) over both directions:
//
//   chamfer(a, b) = sum_{p in a} min_{q in b} |p - q|^2
//                 + sum_{q in b} min_{p in a} |q - p|^2
//
// The canonical summation order is: each direction is accumulated over its
// source cloud in index order, and the two partial sums are added last. Since
// the partial sums do not depend on which cloud is passed first, the result is
// bitwise symmetric.
//
// Earth mover's distance uses plain (unsquared) Euclidean distance and is the
// minimum total cost over bijections between two equal-size clouds.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "latentcloud/point_cloud.hpp"

namespace latentcloud {

struct Neighbor {
  std::size_t index = 0;
  double squared_distance = 0.0;
  bool operator==(const Neighbor&) const = default;
};

// Exact nearest neighbor search over a fixed cloud (kd-tree). Ties resolve to
// the smallest point index, so results agree with brute_force_nearest.
class SpatialIndex {
 public:
  static constexpr std::size_t kDefaultLeafSize = 8;

  explicit SpatialIndex(const PointCloud& cloud, std::size_t leaf_size = kDefaultLeafSize);

  Neighbor nearest(const Vec3& query) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    // Leaf when axis < 0: covers order_[begin, end).
    int axis = -1;
    double split = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Vec3& q, Neighbor& best) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

Neighbor brute_force_nearest(const PointCloud& cloud, const Vec3& query);

// Clouds with more points than this are searched through a SpatialIndex.
inline constexpr std::size_t kIndexThreshold = 64;

// For every point of `from`, its nearest neighbor in `to`.
std::vector<Neighbor> nearest_neighbors(const PointCloud& from, const PointCloud& to);

double chamfer(const PointCloud& a, const PointCloud& b);

// Gradient of chamfer(a, b) with respect to a's coordinates, holding the
// nearest-neighbor correspondences fixed. Returned as an a.size() x 3 matrix.
Matrix chamfer_grad(const PointCloud& a, const PointCloud& b);

struct ChamferResult {
  double value = 0.0;
  Matrix grad;  // with respect to the first cloud
};
ChamferResult chamfer_with_grad(const PointCloud& a, const PointCloud& b);

struct Assignment {
  // a[i] is matched to b[permutation[i]].
  std::vector<std::size_t> permutation;
  double cost = 0.0;
};

// Sum of |a[i] - b[perm[i]]| in increasing i.
double assignment_cost(const PointCloud& a, const PointCloud& b,
                       const std::vector<std::size_t>& permutation);
bool is_bijection(const std::vector<std::size_t>& permutation);

inline constexpr std::size_t kExactEmdCap = 512;

// Optimal assignment by shortest augmenting paths (Hungarian method).
// Throws CapacityError above `cap` points.
Assignment emd_exact(const PointCloud& a, const PointCloud& b,
                     std::size_t cap = kExactEmdCap);

struct AuctionOptions {
  std::uint64_t max_bids = 200'000'000;
};

// Forward auction with epsilon scaling. Scaling starts at (cost range) / N and
// halves each round until reaching `epsilon`; the final assignment costs at
// most optimum + N * epsilon.
Assignment emd_approx(const PointCloud& a, const PointCloud& b, double epsilon,
                      const AuctionOptions& options = {});

}  // namespace latentcloud
