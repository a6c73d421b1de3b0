#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "latentcloud/error.hpp"
#include "latentcloud/metrics.hpp"

namespace latentcloud {

namespace {

void check_equal_sizes(const PointCloud& a, const PointCloud& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + " needs clouds of equal size, got " +
                         std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
}

Matrix distance_matrix(const PointCloud& a, const PointCloud& b) {
  Matrix d(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) d(i, j) = std::sqrt(squared_distance(a[i], b[j]));
  }
  return d;
}

}  // namespace

Assignment emd_exact(const PointCloud& a, const PointCloud& b, std::size_t cap) {
  check_equal_sizes(a, b, "emd_exact");
  const std::size_t n = a.size();
  if (n > cap) {
    throw CapacityError("emd_exact is limited to " + std::to_string(cap) + " points, got " +
                        std::to_string(n) + "; use emd_approx for larger clouds");
  }
  const Matrix cost = distance_matrix(a, b);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Shortest augmenting path with row/column potentials; indices are 1-based
  // with column 0 as the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    owner[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t r0 = owner[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(r0 - 1, j - 1) - u[r0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (owner[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      owner[col0] = owner[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  Assignment out;
  out.permutation.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.permutation[owner[j] - 1] = j - 1;
  out.cost = assignment_cost(a, b, out.permutation);
  return out;
}

Assignment emd_approx(const PointCloud& a, const PointCloud& b, double epsilon,
                      const AuctionOptions& options) {
  check_equal_sizes(a, b, "emd_approx");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("emd_approx epsilon must be positive and finite");
  }
  const std::size_t n = a.size();
  const Matrix cost = distance_matrix(a, b);
  double lo = cost(0, 0), hi = cost(0, 0);
  for (double c : cost.values()) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> price(n, 0.0);
  std::vector<std::size_t> person_to_object(n, kNone), object_to_person(n, kNone);
  std::uint64_t bids = 0;

  // Persons (points of a) bid for objects (points of b); benefit is -cost.
  auto run_round = [&](double eps) {
    std::fill(person_to_object.begin(), person_to_object.end(), kNone);
    std::fill(object_to_person.begin(), object_to_person.end(), kNone);
    std::deque<std::size_t> unassigned;
    for (std::size_t i = 0; i < n; ++i) unassigned.push_back(i);
    while (!unassigned.empty()) {
      if (bids >= options.max_bids) {
        throw ConvergenceError("emd_approx did not converge within " +
                                   std::to_string(options.max_bids) + " bids",
                               bids);
      }
      ++bids;
      const std::size_t i = unassigned.front();
      unassigned.pop_front();
      const auto row = cost.row(i);
      std::size_t best = 0;
      double best_value = -row[0] - price[0];
      double second_value = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 1; j < n; ++j) {
        const double value = -row[j] - price[j];
        if (value > best_value) {
          second_value = best_value;
          best_value = value;
          best = j;
        } else if (value > second_value) {
          second_value = value;
        }
      }
      const double increment = n == 1 ? eps : best_value - second_value + eps;
      price[best] += increment;
      const std::size_t previous = object_to_person[best];
      if (previous != kNone) {
        person_to_object[previous] = kNone;
        unassigned.push_back(previous);
      }
      object_to_person[best] = i;
      person_to_object[i] = best;
    }
  };

  double eps = (hi - lo) / static_cast<double>(n);
  while (eps > epsilon) {
    run_round(eps);
    eps *= 0.5;
  }
  run_round(epsilon);

  Assignment out;
  out.permutation = person_to_object;
  out.cost = assignment_cost(a, b, out.permutation);
  return out;
}

}  // namespace latentcloud
