#pragma once

// Navier problems (u = 0 and Delta u = f on the boundary) in the weak form
//   a(u, phi) = int (f Lap phi + grad f . grad phi)  for all phi in H^2 cap H^1_0,
// the Navier-to-Neumann pencil and the norms used by the stability sweeps.

#include "steklov/assembly.hpp"
#include "steklov/spectral.hpp"

#include <Eigen/Core>

#include <vector>

namespace steklov {

struct NavierSolution {
  FeFunction u;
  Domain domain;
  FormKind form = FormKind::LaplacianEnergy;  // energy a(., .)
  EssentialBc bc;
  DofMap dofs;
  double residual = 0.0;  // ||K u - F|| / ||F||, zero for F = 0
};

/// Laplacian energy with DirichletAll, or Hessian energy with DirichletAll plus at most
/// one clamp (ClampGamma gives the degenerate limit). Other combinations throw ArgumentError.
NavierSolution solve_navier(const Mesh& mesh, const Domain& domain, const DataField& f, FormKind form,
                            EssentialBc bc = EssentialBc::dirichlet_all(), int quad_order = 0);

/// Hessian energy plus gamma int_Gamma u_nu phi_nu on the reference rectangle, DirichletAll:
/// the limit of the modified problem at the critical exponent.
NavierSolution solve_navier_strange(const Mesh& mesh, const DataField& f, double gamma, int quad_order = 0);

/// <u_nu, phi_i> = int (Lap u phi_i + grad u . grad phi_i) for every global Hermite dof i.
Vector normal_derivative_functional(const NavierSolution& solution);

/// Navier-to-Neumann map restricted to discretely harmonic extensions of boundary data.
struct NtnOperator {
  Eigen::MatrixXd n;          // <N f_j, f_i>
  Eigen::MatrixXd j0;         // int_bdry f_i f_j dS
  Eigen::MatrixXd extension;  // global dofs x basis: columns are the extended basis functions
  std::vector<int> basis;     // retained global trace dofs

  int size() const { return static_cast<int>(basis.size()); }
  /// Largest pencil values mu of N f = mu J0 f, descending (mu = 1 / d).
  std::vector<double> eigenvalues(int k) const;
};

/// Empty `boundary_basis` selects every trace dof of the mesh. Throws BasisError for
/// non-trace dofs or a rank-deficient J0.
NtnOperator build_ntn(const Mesh& mesh, const Domain& domain, std::vector<int> boundary_basis = {},
                      int quad_order = 0);

/// Continuous bilinear nodal field on a tensor grid.
struct Q1Field {
  std::vector<double> xs;
  std::vector<double> ys;
  Vector values;  // node (i, j) at i * ys.size() + j

  double value(double x, double y) const;
  Vec2 gradient(double x, double y) const;
};

/// Second-order splitting with bilinear elements on the mesh refined `refine` times per
/// direction: Lap v = 0 with v = f on the boundary, then Lap u = v with u = 0.
Q1Field solve_mixed_splitting(const Mesh& mesh, const DataField& f, int refine = 4);

/// ||u - w||_{H^1} / ||w||_{H^1} over the reference rectangle.
double relative_h1_error(const FeFunction& u, const Q1Field& w);

/// ||D^beta u_eps - (D^beta u)_0|| over Omega_eps, with (.)_0 the extension by zero.
struct ExtensionNorms {
  double l2 = 0.0;
  double grad = 0.0;
  double lap = 0.0;
  double hess = 0.0;     // Frobenius norm of the Hessian difference
  double limit_h1 = 0.0;  // ||u||_{H^1(Omega)} of the limit function

  double h1() const;
};

/// `perturbed` lives on Omega_eps (pulled back or reference), `limit` on the rectangle.
ExtensionNorms zero_extension_distance(const NavierSolution& perturbed, const NavierSolution& limit,
                                       int gauss_points = 6);

/// ||u_nu||_{L^2(Gamma_eps)} on the physical top boundary.
double gamma_normal_norm(const NavierSolution& solution, int gauss_points = 8);

}  // namespace steklov
