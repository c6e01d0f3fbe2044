#pragma once

// Independent numerical oracles shared by the unit and acceptance tests.

#include <cmath>
#include <functional>

namespace steklov::oracle {

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature with Richardson correction.
inline double adaptive(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return detail::simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

/// Energy density of one cell mode, built directly from V = (beta - omega beta y / 2) e^{omega y}.
inline double mode_integrand(double beta, double omega, double y) {
  const double e = std::exp(omega * y);
  const double a = beta;
  const double b = -0.5 * omega * beta;
  const double f = (a + b * y) * e;
  const double f1 = (b + omega * (a + b * y)) * e;
  const double f2 = (2.0 * omega * b + omega * omega * (a + b * y)) * e;
  return 0.5 * (std::pow(omega, 4) * f * f + 2.0 * omega * omega * f1 * f1 + f2 * f2);
}

}  // namespace steklov::oracle
