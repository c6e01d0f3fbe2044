#pragma once

// Microscopic biharmonic problem on the periodic half strip Y x (-inf, 0): trace b
// on top, vanishing second vertical derivative there, decay at depth. Each Fourier
// mode is solved in closed form, V_k = (A_k + B_k y) e^{omega_k y}.

#include "steklov/profile_geometry.hpp"

#include <vector>

namespace steklov {

struct CellMode {
  int k = 0;
  double omega = 0.0;  // 2 pi k
  // Cosine and sine parts of V_k; a = profile coefficient, b = -omega a / 2.
  double a_cos = 0.0;
  double b_cos = 0.0;
  double a_sin = 0.0;
  double b_sin = 0.0;
  double gamma = 0.0;  // (3/4) omega^3 (a_cos^2 + a_sin^2)
};

struct CellSolution {
  std::vector<CellMode> modes;  // k = 1..k_max (k = 0 carries no energy)
  double gamma = 0.0;
};

CellSolution solve_cell(const BoundaryProfile& profile, int k_max);

/// Cell average of |D^2 V|^2 at depth y <= 0.
double cell_energy_density(const CellSolution& solution, double y);

/// Exact energy below depth L >= 0, i.e. the integral of the density over (-inf, -L).
double cell_energy_tail(const CellSolution& solution, double depth);

}  // namespace steklov
