#pragma once

// Bogner-Fox-Schmit bicubic Hermite rectangle. Local function 4 a + r belongs to
// corner a (counterclockwise from the lower left) and dof role r (u, u_x, u_y, u_xy).

#include <array>

namespace steklov {

/// Cubic Hermite basis on [0, 1]: left value, left slope, right value, right slope.
template <typename Scalar = double>
struct Hermite1D {
  // d-th derivative (d <= 2) of the four basis functions at t.
  static std::array<Scalar, 4> eval(Scalar t, int d) {
    const Scalar t2 = t * t;
    const Scalar t3 = t2 * t;
    switch (d) {
      case 0:
        return {1 - 3 * t2 + 2 * t3, t - 2 * t2 + t3, 3 * t2 - 2 * t3, -t2 + t3};
      case 1:
        return {-6 * t + 6 * t2, 1 - 4 * t + 3 * t2, 6 * t - 6 * t2, -2 * t + 3 * t2};
      default:
        return {-6 + 12 * t, -4 + 6 * t, 6 - 12 * t, -2 + 6 * t};
    }
  }
};

/// Value, gradient and Hessian (xx, xy, yy) of the 16 local functions at a point.
template <typename Scalar = double>
struct BicubicJets {
  std::array<Scalar, 16> v;
  std::array<Scalar, 16> dx;
  std::array<Scalar, 16> dy;
  std::array<Scalar, 16> dxx;
  std::array<Scalar, 16> dxy;
  std::array<Scalar, 16> dyy;
};

/// Local (s, t) in [0, 1]^2 on an element of size hx x hy; derivatives are in
/// physical (reference-rectangle) units.
template <typename Scalar = double>
BicubicJets<Scalar> bicubic_jets(Scalar s, Scalar t, Scalar hx, Scalar hy) {
  const auto x0 = Hermite1D<Scalar>::eval(s, 0);
  const auto x1 = Hermite1D<Scalar>::eval(s, 1);
  const auto x2 = Hermite1D<Scalar>::eval(s, 2);
  const auto y0 = Hermite1D<Scalar>::eval(t, 0);
  const auto y1 = Hermite1D<Scalar>::eval(t, 1);
  const auto y2 = Hermite1D<Scalar>::eval(t, 2);
  constexpr int corner_x[4] = {0, 1, 1, 0};
  constexpr int corner_y[4] = {0, 0, 1, 1};
  constexpr int role_dx[4] = {0, 1, 0, 1};
  constexpr int role_dy[4] = {0, 0, 1, 1};
  BicubicJets<Scalar> jets;
  for (int a = 0; a < 4; ++a) {
    for (int r = 0; r < 4; ++r) {
      const int ix = 2 * corner_x[a] + role_dx[r];
      const int iy = 2 * corner_y[a] + role_dy[r];
      // Slope functions carry the element length so dofs are true derivatives.
      const Scalar sx = role_dx[r] ? hx : Scalar(1);
      const Scalar sy = role_dy[r] ? hy : Scalar(1);
      const Scalar scale = sx * sy;
      const int k = 4 * a + r;
      jets.v[k] = scale * x0[ix] * y0[iy];
      jets.dx[k] = scale * x1[ix] * y0[iy] / hx;
      jets.dy[k] = scale * x0[ix] * y1[iy] / hy;
      jets.dxx[k] = scale * x2[ix] * y0[iy] / (hx * hx);
      jets.dxy[k] = scale * x1[ix] * y1[iy] / (hx * hy);
      jets.dyy[k] = scale * x0[ix] * y2[iy] / (hy * hy);
    }
  }
  return jets;
}

}  // namespace steklov
