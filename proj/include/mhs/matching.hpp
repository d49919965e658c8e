#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mhs/matrix.hpp"

namespace mhs {

struct Matching {
  std::vector<std::optional<std::size_t>> user_of_helper;
  double total_weight = 0.0;
};

/// Maximum-weight bipartite matching on a non-negative helper x user weight
/// matrix (Hungarian method with potentials, O(n^3) on the padded square).
/// Pairs of zero weight are left unmatched.
inline Matching max_weight_bipartite_matching(const Matrix<double>& weights) {
  const std::size_t rows = weights.rows();
  const std::size_t cols = weights.cols();
  Matching result;
  result.user_of_helper.assign(rows, std::nullopt);
  if (rows == 0 || cols == 0) return result;

  double wmax = 0.0;
  for (double w : weights.data()) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("matching: weights must be finite and >= 0");
    wmax = std::max(wmax, w);
  }
  if (wmax == 0.0) return result;

  const std::size_t n = std::max(rows, cols);
  auto cost = [&](std::size_t i, std::size_t j) {  // 1-based, padded entries cost wmax
    const double w = (i <= rows && j <= cols) ? weights(i - 1, j - 1) : 0.0;
    return wmax - w;
  };
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= cols; ++j) {
    const std::size_t i = p[j];
    if (i == 0 || i > rows) continue;
    const double w = weights(i - 1, j - 1);
    if (w > 0.0) {
      result.user_of_helper[i - 1] = j - 1;
      result.total_weight += w;
    }
  }
  return result;
}

}  // namespace mhs
