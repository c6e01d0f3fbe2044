#pragma once

// Quadrature points of the physical domain expressed in reference coordinates.
// Shared by the form assembly and the norm evaluations in the Navier module.

#include "steklov/assembly.hpp"
#include "steklov/quadrature.hpp"

#include <functional>
#include <vector>

namespace steklov {

struct QuadPoint {
  int element = 0;
  double s = 0.0;  // local coordinates in [0, 1]^2
  double t = 0.0;
  Vec2 xi = Vec2::Zero();  // reference point
  Vec2 x = Vec2::Zero();   // physical point Phi^{-1}(xi)
  Mat2 jacobian = Mat2::Identity();
  HJet h;
  Vec2 normal = Vec2::Zero();  // outward physical unit normal (boundary points only)
  double weight = 0.0;         // physical measure dx or dS
};

/// Extra eta-breakpoints for the column through xi_1 (appended to `out`).
using BreakpointFn = std::function<void(double xi1, std::vector<double>& out)>;

/// Volume points of element e. Each element column is split at the layer bottom.
void element_volume_points(const Mesh& mesh, int e, const Domain& domain, const GaussRule<double>& rule,
                           std::vector<QuadPoint>& out, const BreakpointFn& extra = {});

/// Points on one boundary edge, weights carry the physical arc length.
void edge_points(const Mesh& mesh, const BoundaryEdge& edge, const Domain& domain, const GaussRule<double>& rule,
                 std::vector<QuadPoint>& out);

/// Physical jets of the 16 local shape functions at a point.
std::array<Jet, 16> shape_jets(const Mesh& mesh, const QuadPoint& p);

/// Global dofs of the 16 local functions of element e.
std::array<int, 16> element_dofs(const Mesh& mesh, int e);

/// Validated number of Gauss points per direction (0 selects the default).
int resolve_quad_order(const Domain& domain, int quad_order);

}  // namespace steklov
