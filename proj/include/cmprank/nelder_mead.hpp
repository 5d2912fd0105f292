#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace cmprank {

template <std::size_t N>
struct SimplexResult {
  std::array<double, N> point{};
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

struct SimplexOptions {
  double initial_step = 0.1;
  /// Stop once max f - min f over the simplex falls below this.
  double value_spread = 1e-9;
  int max_iterations = 500;
};

/// Deterministic Nelder-Mead minimizer (standard coefficients 1, 2, 1/2, 1/2).
/// f may return +inf for infeasible points; such vertices are simply ranked
/// last.
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, const std::array<double, N>& start, const SimplexOptions& opt = {}) {
  using Point = std::array<double, N>;
  constexpr double reflect = 1.0;
  constexpr double expand = 2.0;
  constexpr double contract = 0.5;
  constexpr double shrink = 0.5;

  std::array<Point, N + 1> vertex{};
  std::array<double, N + 1> value{};
  vertex[0] = start;
  for (std::size_t i = 0; i < N; ++i) {
    vertex[i + 1] = start;
    vertex[i + 1][i] += opt.initial_step;
  }
  for (std::size_t i = 0; i <= N; ++i) value[i] = f(vertex[i]);

  auto affine = [](const Point& a, const Point& b, double t) {
    // a + t (b - a)
    Point out{};
    for (std::size_t k = 0; k < N; ++k) out[k] = a[k] + t * (b[k] - a[k]);
    return out;
  };

  std::array<std::size_t, N + 1> order{};
  SimplexResult<N> result;
  int it = 0;
  for (;; ++it) {
    for (std::size_t i = 0; i <= N; ++i) order[i] = i;
    // Stable ordering keeps ties deterministic.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[N - 1];

    const double spread = value[worst] - value[best];
    if (std::isfinite(value[worst]) && spread < opt.value_spread) {
      result.converged = true;
      break;
    }
    if (it >= opt.max_iterations) break;

    Point centroid{};
    for (std::size_t i = 0; i <= N; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < N; ++k) centroid[k] += vertex[i][k] / static_cast<double>(N);
    }

    const Point reflected = affine(centroid, vertex[worst], -reflect);
    const double f_reflected = f(reflected);

    if (f_reflected < value[best]) {
      const Point expanded = affine(centroid, vertex[worst], -expand);
      const double f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        vertex[worst] = expanded;
        value[worst] = f_expanded;
      } else {
        vertex[worst] = reflected;
        value[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < value[second_worst]) {
      vertex[worst] = reflected;
      value[worst] = f_reflected;
      continue;
    }

    const bool outside = f_reflected < value[worst];
    const Point contracted =
        outside ? affine(centroid, reflected, contract) : affine(centroid, vertex[worst], contract);
    const double f_contracted = f(contracted);
    if (f_contracted < (outside ? f_reflected : value[worst])) {
      vertex[worst] = contracted;
      value[worst] = f_contracted;
      continue;
    }

    for (std::size_t i = 0; i <= N; ++i) {
      if (i == best) continue;
      vertex[i] = affine(vertex[best], vertex[i], shrink);
      value[i] = f(vertex[i]);
    }
  }

  const auto best_it = std::min_element(value.begin(), value.end());
  const auto best = static_cast<std::size_t>(best_it - value.begin());
  result.point = vertex[best];
  result.value = value[best];
  result.iterations = it;
  return result;
}

}  // namespace cmprank
