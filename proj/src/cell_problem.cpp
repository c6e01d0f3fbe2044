#include "steklov/cell_problem.hpp"

#include "steklov/errors.hpp"

#include <cmath>
#include <numbers>

namespace steklov {

CellSolution solve_cell(const BoundaryProfile& profile, int k_max) {
  if (k_max < 1) throw ArgumentError("solve_cell: k_max must be >= 1");
  const auto fourier = profile.fourier_modes(k_max);
  CellSolution out;
  for (int k = 1; k <= k_max; ++k) {
    CellMode m;
    m.k = k;
    m.omega = 2.0 * std::numbers::pi * k;
    m.a_cos = fourier.cos[k];
    m.a_sin = fourier.sin[k];
    m.b_cos = -0.5 * m.omega * m.a_cos;
    m.b_sin = -0.5 * m.omega * m.a_sin;
    m.gamma = 0.75 * std::pow(m.omega, 3) * (m.a_cos * m.a_cos + m.a_sin * m.a_sin);
    out.gamma += m.gamma;
    out.modes.push_back(m);
  }
  return out;
}

double cell_energy_density(const CellSolution& solution, double y) {
  if (y > 0.0) throw DomainError("cell_energy_density: depth y must be <= 0");
  double sum = 0.0;
  for (const CellMode& m : solution.modes) {
    const double t = m.omega * y;
    const double amp2 = m.a_cos * m.a_cos + m.a_sin * m.a_sin;
    // (1/2) [omega^4 f^2 + 2 omega^2 f'^2 + f''^2] with f = (1 - t/2) e^t.
    sum += 0.5 * amp2 * std::pow(m.omega, 4) * std::exp(2.0 * t) * (t * t - 2.0 * t + 1.5);
  }
  return sum;
}

double cell_energy_tail(const CellSolution& solution, double depth) {
  if (depth < 0.0) throw DomainError("cell_energy_tail: depth must be >= 0");
  double sum = 0.0;
  for (const CellMode& m : solution.modes) {
    const double s = m.omega * depth;
    const double amp2 = m.a_cos * m.a_cos + m.a_sin * m.a_sin;
    sum += 0.5 * amp2 * std::pow(m.omega, 3) * std::exp(-2.0 * s) * (0.5 * s * s + 1.5 * s + 1.5);
  }
  return sum;
}

}  // namespace steklov
