#pragma once

// Reference implementations used only by tests. They take the slow obvious
// route and share no code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "latentcloud/nn.hpp"
#include "latentcloud/point_cloud.hpp"
#include "latentcloud/random.hpp"

namespace oracle {

using latentcloud::Matrix;
using latentcloud::PointCloud;
using latentcloud::Rng;
using latentcloud::Vec3;

inline double sq(double v) { return v * v; }

inline double dist2(const Vec3& a, const Vec3& b) {
  return sq(a[0] - b[0]) + sq(a[1] - b[1]) + sq(a[2] - b[2]);
}

// Plain double loop, both directions summed in index order.
inline double chamfer(const PointCloud& a, const PointCloud& b) {
  double ab = 0.0;
  for (const Vec3& p : a) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : b) best = std::min(best, dist2(p, q));
    ab += best;
  }
  double ba = 0.0;
  for (const Vec3& q : b) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& p : a) best = std::min(best, dist2(q, p));
    ba += best;
  }
  return ab + ba;
}

struct NearestResult {
  std::size_t index;
  double d2;
};

inline NearestResult nearest(const std::vector<Vec3>& pts, const Vec3& q) {
  NearestResult best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = dist2(q, pts[i]);
    if (d < best.d2) best = {i, d};
  }
  return best;
}

inline double perm_cost(const PointCloud& a, const PointCloud& b,
                        const std::vector<std::size_t>& perm) {
  double c = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) c += std::sqrt(dist2(a[i], b[perm[i]]));
  return c;
}

// Minimum over all n! bijections.
inline double exhaustive_emd(const PointCloud& a, const PointCloud& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, perm_cost(a, b, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// out[r][j] = b[j] + sum_i x[r][i] * w[i][j] by explicit dot products.
inline Matrix affine_rows(const Matrix& w, const std::vector<double>& b, const Matrix& x) {
  Matrix out(x.rows(), w.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < w.rows(); ++i) dot += x(r, i) * w(i, j);
      out(r, j) = dot + b[j];
    }
  }
  return out;
}

// Central difference of f with respect to every entry of `values`.
inline std::vector<double> finite_difference(std::span<double> values,
                                             const std::function<double()>& f,
                                             double step = 1e-6) {
  std::vector<double> g(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + step;
    const double up = f();
    values[i] = saved - step;
    const double down = f();
    values[i] = saved;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

// |a - n| / max(|a|, |n|, floor): relative error with an absolute floor for
// entries that are essentially zero.
inline double max_relative_error(std::span<const double> analytic,
                                 std::span<const double> numeric, double floor) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

inline PointCloud random_cloud(Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
  return PointCloud(std::move(pts));
}

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

template <typename T>
std::vector<T> permuted(const std::vector<T>& items, const std::vector<std::size_t>& perm) {
  std::vector<T> out(items.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = items[perm[i]];
  return out;
}

inline std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  rng.shuffle(p);
  return p;
}

inline Matrix permute_rows(const Matrix& m, const std::vector<std::size_t>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < perm.size(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(perm[r], c);
  }
  return out;
}

}  // namespace oracle
