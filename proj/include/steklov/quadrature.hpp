#pragma once

#include <cmath>
#include <numbers>
#include <vector>

namespace steklov {

/// Gauss-Legendre rule on [0, 1].
template <typename Scalar = double>
struct GaussRule {
  std::vector<Scalar> points;
  std::vector<Scalar> weights;

  int size() const { return static_cast<int>(points.size()); }
};

/// n-point Gauss-Legendre rule on [0, 1] (exact for degree 2n - 1), by Newton on P_n.
template <typename Scalar = double>
GaussRule<Scalar> gauss_legendre(int n) {
  GaussRule<Scalar> rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar x = std::cos(std::numbers::pi_v<Scalar> * (i + Scalar(0.75)) / (n + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1;
      Scalar p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Scalar dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < Scalar(1e-16)) break;
    }
    // Recompute the derivative at the converged root.
    {
      Scalar p0 = 1;
      Scalar p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
    }
    const Scalar w = 2 / ((1 - x * x) * dp * dp);
    rule.points[i] = (1 - x) / 2;
    rule.points[n - 1 - i] = (1 + x) / 2;
    rule.weights[i] = w / 2;
    rule.weights[n - 1 - i] = w / 2;
  }
  if (n % 2 == 1) rule.points[n / 2] = Scalar(0.5);
  return rule;
}

}  // namespace steklov
