#pragma once

// Bilinear forms and load functionals on the reference rectangle, or on Omega_eps
// expressed in reference coordinates through u = u_hat o Phi_eps.

#include "steklov/mesh.hpp"
#include "steklov/profile_geometry.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <functional>
#include <memory>

namespace steklov {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

enum class FormKind {
  LaplacianEnergy,  // int Lap u Lap v
  HessianEnergy,    // int D^2 u : D^2 v
  GradMass,         // int grad u . grad v
  Mass,             // int u v
  MixedUDelta,      // int u Lap v  (u trial, v test)
  NormalTrace,      // int_part u_nu v_nu dS
  BoundaryMass,     // int_part u v dS
};

enum class BoundaryPart { Gamma, Sigma, All };

struct Form {
  FormKind kind = FormKind::Mass;
  BoundaryPart part = BoundaryPart::All;

  bool is_boundary() const { return kind == FormKind::NormalTrace || kind == FormKind::BoundaryMass; }
  bool is_symmetric() const { return kind != FormKind::MixedUDelta; }
};

/// Where the physical functions live: the reference rectangle itself, or Omega_eps
/// pulled back through a layer diffeomorphism.
class Domain {
 public:
  static Domain reference() { return Domain(); }
  static Domain pulled_back(DiffeoField diffeo) {
    Domain d;
    d.diffeo_ = std::make_shared<const DiffeoField>(std::move(diffeo));
    return d;
  }

  bool is_reference() const { return diffeo_ == nullptr || diffeo_->is_identity(); }
  /// Null for the reference domain.
  const DiffeoField* diffeo() const { return diffeo_.get(); }

 private:
  std::shared_ptr<const DiffeoField> diffeo_;
};

inline constexpr int kReferenceQuadOrder = 4;
inline constexpr int kPulledBackQuadOrder = 6;

/// Value, gradient and Hessian of a scalar field at one point.
struct Jet {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();

  double laplacian() const { return hess(0, 0) + hess(1, 1); }
};

/// Physical jet of u = u_hat o Phi from the reference jet of u_hat:
/// grad u = J^T grad u_hat, D^2 u = J^T D^2 u_hat J - d_y u_hat D^2 h.
Jet pull_back_jet(const Jet& reference, const Mat2& jacobian, const HJet& h);

/// Piecewise bicubic Hermite function; coefficients over the full dof set.
class FeFunction {
 public:
  FeFunction(Mesh mesh, Vector coefficients);

  static FeFunction zero(const Mesh& mesh);
  static FeFunction from_free(const Mesh& mesh, const DofMap& dofs, const Vector& free_values);

  const Mesh& mesh() const { return mesh_; }
  const Vector& coefficients() const { return coeffs_; }
  Vector free_values(const DofMap& dofs) const;

  /// Jet in reference coordinates at a reference point.
  Jet eval(const Vec2& xi) const;
  /// Jet of u_hat o Phi_eps at the physical point Phi_eps^{-1}(xi).
  Jet eval_physical(const Domain& domain, const Vec2& xi) const;

  FeFunction operator-(const FeFunction& other) const;
  FeFunction operator*(double c) const;

 private:
  Mesh mesh_;
  Vector coeffs_;
};

/// Hermite interpolant; f returns (u, u_x, u_y, u_xy) at (x, y).
FeFunction interpolate(const Mesh& mesh, const std::function<std::array<double, 4>(double, double)>& f);

/// Data with square-integrable gradient, evaluated at physical points.
struct DataField {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> gradient;

  static DataField zero();
  static DataField constant(double c);
  /// Evaluates the Hermite function at physical points of the bounding box
  /// (polynomial continuation of the boundary elements outside the rectangle).
  static DataField from(const FeFunction& f);
};

/// Assembled form on the free dofs.
struct FeSystem {
  SparseMatrix matrix;
  Form form;
  Domain domain;
  int quad_order = kReferenceQuadOrder;
  Mesh mesh;
  DofMap dofs;

  int size() const { return static_cast<int>(matrix.rows()); }
};

/// Assembles the form over free dofs of `dofs`; quad_order >= 4 (>= 6 pulled back).
FeSystem assemble(Form form, const Mesh& mesh, const DofMap& dofs, const Domain& domain,
                  int quad_order = 0);

/// Rectangular variant: rows indexed by the free dofs of `test`, columns by `trial`.
SparseMatrix assemble_matrix(Form form, const Mesh& mesh, const DofMap& test, const DofMap& trial,
                             const Domain& domain, int quad_order = 0);

/// Entries int (f Lap phi_i + grad f . grad phi_i) over free dofs.
Vector assemble_navier_load(const DataField& f, const Mesh& mesh, const DofMap& dofs,
                            const Domain& domain, int quad_order = 0);
Vector assemble_navier_load(const FeFunction& f, const Mesh& mesh, const DofMap& dofs,
                            const Domain& domain, int quad_order = 0);

enum class Norm { L2, H1, H2 };

/// || (u_hat - u) o Phi_eps || over Omega_eps (full Sobolev norm up to the given order).
double e_distance(const FeFunction& u_hat, const FeFunction& u, const Domain& domain, Norm norm,
                  int quad_order = kPulledBackQuadOrder);

/// At least 8 elements per oscillation period in x.
bool resolves_oscillation(const Mesh& mesh, const DomainSpec& spec);

}  // namespace steklov
