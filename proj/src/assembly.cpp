#include "steklov/assembly.hpp"

#include "steklov/errors.hpp"
#include "steklov/hermite.hpp"
#include "steklov/integration.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

namespace steklov {

namespace {

struct PointGeometry {
  Vec2 x;
  Mat2 jacobian;
  HJet h;
  double det;
};

PointGeometry geometry_at(const Domain& domain, const Vec2& xi) {
  PointGeometry g{xi, Mat2::Identity(), HJet{}, 1.0};
  if (domain.is_reference()) return g;
  const DiffeoField& phi = *domain.diffeo();
  g.x = phi.inverse(xi);
  g.h = phi.h_jet(g.x);
  g.jacobian << 1.0, 0.0, -g.h.hx, 1.0 - g.h.hy;
  g.det = 1.0 - g.h.hy;
  if (!(g.det > 0.0)) {
    throw GeometryError("det D Phi = " + std::to_string(g.det) + " <= 0 at x = (" + std::to_string(g.x.x()) + ", " +
                        std::to_string(g.x.y()) + ")");
  }
  return g;
}

// Sorted breakpoints strictly inside (lo, hi), with the endpoints.
std::vector<double> split_interval(double lo, double hi, std::vector<double> cuts) {
  std::vector<double> out{lo};
  std::sort(cuts.begin(), cuts.end());
  const double tol = 1e-12 * (hi - lo);
  for (double c : cuts) {
    if (c > out.back() + tol && c < hi - tol) out.push_back(c);
  }
  out.push_back(hi);
  return out;
}

Jet reference_jet(const BicubicJets<double>& j, int k) {
  Jet out;
  out.value = j.v[k];
  out.grad = Vec2(j.dx[k], j.dy[k]);
  out.hess << j.dxx[k], j.dxy[k], j.dxy[k], j.dyy[k];
  return out;
}

double integrand(FormKind kind, const Jet& test, const Jet& trial, const Vec2& normal) {
  switch (kind) {
    case FormKind::LaplacianEnergy:
      return test.laplacian() * trial.laplacian();
    case FormKind::HessianEnergy:
      return (test.hess.array() * trial.hess.array()).sum();
    case FormKind::GradMass:
      return test.grad.dot(trial.grad);
    case FormKind::Mass:
    case FormKind::BoundaryMass:
      return test.value * trial.value;
    case FormKind::MixedUDelta:
      return trial.value * test.laplacian();
    case FormKind::NormalTrace:
      return test.grad.dot(normal) * trial.grad.dot(normal);
  }
  return 0.0;
}

bool on_part(BoundaryTag tag, BoundaryPart part) {
  switch (part) {
    case BoundaryPart::Gamma:
      return tag == BoundaryTag::Gamma;
    case BoundaryPart::Sigma:
      return tag == BoundaryTag::Sigma;
    case BoundaryPart::All:
      return true;
  }
  return false;
}

void check_dofmap(const Mesh& mesh, const DofMap& dofs) {
  if (dofs.total() != kDofsPerNode * mesh.node_count()) {
    throw ArgumentError("dof map does not belong to this mesh");
  }
}

void warn_resolution(const Mesh& mesh, const Domain& domain) {
  if (domain.is_reference()) return;
  const DomainSpec& spec = domain.diffeo()->spec();
  if (spec.profile.nonconstant() && !resolves_oscillation(mesh, spec)) {
    std::cerr << "warning: " << mesh.nx() << " elements in x resolve fewer than 8 per oscillation period (eps = "
              << spec.epsilon << ")\n";
  }
}

}  // namespace

Jet pull_back_jet(const Jet& reference, const Mat2& jacobian, const HJet& h) {
  Jet out;
  out.value = reference.value;
  out.grad = jacobian.transpose() * reference.grad;
  Mat2 d2h;
  d2h << h.hxx, h.hxy, h.hxy, h.hyy;
  out.hess = jacobian.transpose() * reference.hess * jacobian - reference.grad.y() * d2h;
  return out;
}

int resolve_quad_order(const Domain& domain, int quad_order) {
  const int minimum = domain.is_reference() ? kReferenceQuadOrder : kPulledBackQuadOrder;
  if (quad_order == 0) return minimum;
  if (quad_order < minimum) {
    throw ArgumentError("quadrature order " + std::to_string(quad_order) + " below the minimum " +
                        std::to_string(minimum));
  }
  return quad_order;
}

std::array<int, 16> element_dofs(const Mesh& mesh, int e) {
  const auto nodes = mesh.element_nodes(e);
  std::array<int, 16> out{};
  for (int a = 0; a < 4; ++a) {
    for (int r = 0; r < 4; ++r) out[4 * a + r] = kDofsPerNode * nodes[a] + r;
  }
  return out;
}

void element_volume_points(const Mesh& mesh, int e, const Domain& domain, const GaussRule<double>& rule,
                           std::vector<QuadPoint>& out, const BreakpointFn& extra) {
  const int i = mesh.element_column(e);
  const int j = mesh.element_row(e);
  const double x0 = mesh.xs()[i];
  const double hx = mesh.xs()[i + 1] - x0;
  const double y0 = mesh.ys()[j];
  const double hy = mesh.ys()[j + 1] - y0;
  std::vector<double> cuts;
  for (int p = 0; p < rule.size(); ++p) {
    const double xi1 = x0 + hx * rule.points[p];
    cuts.clear();
    if (!domain.is_reference()) cuts.push_back(domain.diffeo()->layer_bottom(xi1));
    if (extra) extra(xi1, cuts);
    const auto pieces = split_interval(y0, y0 + hy, cuts);
    for (std::size_t k = 0; k + 1 < pieces.size(); ++k) {
      const double lo = pieces[k];
      const double len = pieces[k + 1] - lo;
      for (int q = 0; q < rule.size(); ++q) {
        QuadPoint pt;
        pt.element = e;
        pt.xi = Vec2(xi1, lo + len * rule.points[q]);
        pt.s = rule.points[p];
        pt.t = (pt.xi.y() - y0) / hy;
        const PointGeometry g = geometry_at(domain, pt.xi);
        pt.x = g.x;
        pt.jacobian = g.jacobian;
        pt.h = g.h;
        pt.weight = rule.weights[p] * hx * rule.weights[q] * len / g.det;
        out.push_back(pt);
      }
    }
  }
}

void edge_points(const Mesh& mesh, const BoundaryEdge& edge, const Domain& domain, const GaussRule<double>& rule,
                 std::vector<QuadPoint>& out) {
  const int e = edge.element;
  const int i = mesh.element_column(e);
  const int j = mesh.element_row(e);
  const double x0 = mesh.xs()[i];
  const double hx = mesh.xs()[i + 1] - x0;
  const double y0 = mesh.ys()[j];
  const double hy = mesh.ys()[j + 1] - y0;

  Vec2 n_ref;
  Vec2 t_ref;
  const bool horizontal = edge.side == Side::Bottom || edge.side == Side::Top;
  switch (edge.side) {
    case Side::Bottom: n_ref = Vec2(0, -1); break;
    case Side::Right: n_ref = Vec2(1, 0); break;
    case Side::Top: n_ref = Vec2(0, 1); break;
    case Side::Left: n_ref = Vec2(-1, 0); break;
  }
  t_ref = horizontal ? Vec2(1, 0) : Vec2(0, 1);

  std::vector<double> pieces;
  double fixed = 0.0;
  if (horizontal) {
    fixed = edge.side == Side::Bottom ? y0 : y0 + hy;
    pieces = {x0, x0 + hx};
  } else {
    fixed = edge.side == Side::Left ? x0 : x0 + hx;
    std::vector<double> cuts;
    if (!domain.is_reference()) cuts.push_back(domain.diffeo()->layer_bottom(fixed));
    pieces = split_interval(y0, y0 + hy, cuts);
  }

  for (std::size_t k = 0; k + 1 < pieces.size(); ++k) {
    const double lo = pieces[k];
    const double len = pieces[k + 1] - lo;
    for (int q = 0; q < rule.size(); ++q) {
      const double r = lo + len * rule.points[q];
      QuadPoint pt;
      pt.element = e;
      pt.xi = horizontal ? Vec2(r, fixed) : Vec2(fixed, r);
      pt.s = std::clamp((pt.xi.x() - x0) / hx, 0.0, 1.0);
      pt.t = std::clamp((pt.xi.y() - y0) / hy, 0.0, 1.0);
      const PointGeometry g = geometry_at(domain, pt.xi);
      pt.x = g.x;
      pt.jacobian = g.jacobian;
      pt.h = g.h;
      // Physical tangent J^{-1} t_ref; physical normal along J^T n_ref.
      const Vec2 tangent = g.jacobian.inverse() * t_ref;
      const Vec2 normal = g.jacobian.transpose() * n_ref;
      pt.normal = normal.normalized();
      pt.weight = rule.weights[q] * len * tangent.norm();
      out.push_back(pt);
    }
  }
}

std::array<Jet, 16> shape_jets(const Mesh& mesh, const QuadPoint& p) {
  const int i = mesh.element_column(p.element);
  const int j = mesh.element_row(p.element);
  const double hx = mesh.xs()[i + 1] - mesh.xs()[i];
  const double hy = mesh.ys()[j + 1] - mesh.ys()[j];
  const auto jets = bicubic_jets(p.s, p.t, hx, hy);
  std::array<Jet, 16> out;
  for (int k = 0; k < 16; ++k) out[k] = pull_back_jet(reference_jet(jets, k), p.jacobian, p.h);
  return out;
}

SparseMatrix assemble_matrix(Form form, const Mesh& mesh, const DofMap& test, const DofMap& trial,
                             const Domain& domain, int quad_order) {
  check_dofmap(mesh, test);
  check_dofmap(mesh, trial);
  const int order = resolve_quad_order(domain, quad_order);
  const auto rule = gauss_legendre<double>(order);

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<QuadPoint> points;
  Eigen::Matrix<double, 16, 16> local;

  auto scatter = [&](int e) {
    const auto dofs = element_dofs(mesh, e);
    for (int a = 0; a < 16; ++a) {
      const int row = test.free_index(dofs[a]);
      if (row < 0) continue;
      for (int b = 0; b < 16; ++b) {
        const int col = trial.free_index(dofs[b]);
        if (col >= 0 && local(a, b) != 0.0) triplets.emplace_back(row, col, local(a, b));
      }
    }
  };
  auto accumulate = [&](const QuadPoint& p) {
    const auto jets = shape_jets(mesh, p);
    for (int a = 0; a < 16; ++a) {
      for (int b = 0; b < 16; ++b) local(a, b) += p.weight * integrand(form.kind, jets[a], jets[b], p.normal);
    }
  };

  if (form.is_boundary()) {
    triplets.reserve(mesh.boundary_edges().size() * 256);
    for (const BoundaryEdge& edge : mesh.boundary_edges()) {
      if (!on_part(edge.tag, form.part)) continue;
      points.clear();
      edge_points(mesh, edge, domain, rule, points);
      local.setZero();
      for (const auto& p : points) accumulate(p);
      scatter(edge.element);
    }
  } else {
    triplets.reserve(static_cast<std::size_t>(mesh.element_count()) * 256);
    for (int e = 0; e < mesh.element_count(); ++e) {
      points.clear();
      element_volume_points(mesh, e, domain, rule, points);
      local.setZero();
      for (const auto& p : points) accumulate(p);
      scatter(e);
    }
  }

  SparseMatrix m(test.free_count(), trial.free_count());
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

FeSystem assemble(Form form, const Mesh& mesh, const DofMap& dofs, const Domain& domain, int quad_order) {
  warn_resolution(mesh, domain);
  FeSystem sys{assemble_matrix(form, mesh, dofs, dofs, domain, quad_order), form, domain,
               resolve_quad_order(domain, quad_order), mesh, dofs};
  return sys;
}

namespace {

Vector navier_load(const std::function<Jet(const QuadPoint&)>& data, const Mesh& mesh, const DofMap& dofs,
                   const Domain& domain, int quad_order) {
  check_dofmap(mesh, dofs);
  const auto rule = gauss_legendre<double>(resolve_quad_order(domain, quad_order));
  Vector load = Vector::Zero(dofs.free_count());
  std::vector<QuadPoint> points;
  for (int e = 0; e < mesh.element_count(); ++e) {
    points.clear();
    element_volume_points(mesh, e, domain, rule, points);
    const auto gdofs = element_dofs(mesh, e);
    for (const auto& p : points) {
      const Jet f = data(p);
      const auto jets = shape_jets(mesh, p);
      for (int a = 0; a < 16; ++a) {
        const int row = dofs.free_index(gdofs[a]);
        if (row < 0) continue;
        load[row] += p.weight * (f.value * jets[a].laplacian() + f.grad.dot(jets[a].grad));
      }
    }
  }
  return load;
}

}  // namespace

Vector assemble_navier_load(const DataField& f, const Mesh& mesh, const DofMap& dofs, const Domain& domain,
                            int quad_order) {
  if (!f.value || !f.gradient) throw ArgumentError("assemble_navier_load: data field is incomplete");
  return navier_load(
      [&](const QuadPoint& p) {
        Jet j;
        j.value = f.value(p.x);
        j.grad = f.gradient(p.x);
        return j;
      },
      mesh, dofs, domain, quad_order);
}

Vector assemble_navier_load(const FeFunction& f, const Mesh& mesh, const DofMap& dofs, const Domain& domain,
                            int quad_order) {
  if (!f.mesh().same_as(mesh)) throw ArgumentError("assemble_navier_load: data lives on a different mesh");
  return navier_load([&](const QuadPoint& p) { return pull_back_jet(f.eval(p.xi), p.jacobian, p.h); }, mesh, dofs,
                     domain, quad_order);
}

// ---------------------------------------------------------------------------
// FeFunction

FeFunction::FeFunction(Mesh mesh, Vector coefficients) : mesh_(std::move(mesh)), coeffs_(std::move(coefficients)) {
  if (coeffs_.size() != kDofsPerNode * mesh_.node_count()) {
    throw ArgumentError("FeFunction: coefficient vector does not match the mesh");
  }
}

FeFunction FeFunction::zero(const Mesh& mesh) { return FeFunction(mesh, Vector::Zero(kDofsPerNode * mesh.node_count())); }

FeFunction FeFunction::from_free(const Mesh& mesh, const DofMap& dofs, const Vector& free_values) {
  check_dofmap(mesh, dofs);
  if (free_values.size() != dofs.free_count()) throw ArgumentError("FeFunction: free vector has the wrong size");
  Vector full = Vector::Zero(dofs.total());
  const auto& fd = dofs.free_dofs();
  for (int k = 0; k < dofs.free_count(); ++k) full[fd[k]] = free_values[k];
  return FeFunction(mesh, std::move(full));
}

Vector FeFunction::free_values(const DofMap& dofs) const {
  check_dofmap(mesh_, dofs);
  Vector out(dofs.free_count());
  const auto& fd = dofs.free_dofs();
  for (int k = 0; k < dofs.free_count(); ++k) out[k] = coeffs_[fd[k]];
  return out;
}

Jet FeFunction::eval(const Vec2& xi) const {
  const int e = mesh_.locate(xi.x(), xi.y());
  const int i = mesh_.element_column(e);
  const int j = mesh_.element_row(e);
  const double hx = mesh_.xs()[i + 1] - mesh_.xs()[i];
  const double hy = mesh_.ys()[j + 1] - mesh_.ys()[j];
  const auto jets = bicubic_jets((xi.x() - mesh_.xs()[i]) / hx, (xi.y() - mesh_.ys()[j]) / hy, hx, hy);
  const auto dofs = element_dofs(mesh_, e);
  Jet out;
  for (int k = 0; k < 16; ++k) {
    const double c = coeffs_[dofs[k]];
    if (c == 0.0) continue;
    out.value += c * jets.v[k];
    out.grad += c * Vec2(jets.dx[k], jets.dy[k]);
    out.hess(0, 0) += c * jets.dxx[k];
    out.hess(0, 1) += c * jets.dxy[k];
    out.hess(1, 1) += c * jets.dyy[k];
  }
  out.hess(1, 0) = out.hess(0, 1);
  return out;
}

Jet FeFunction::eval_physical(const Domain& domain, const Vec2& xi) const {
  const Jet ref = eval(xi);
  if (domain.is_reference()) return ref;
  const PointGeometry g = geometry_at(domain, xi);
  return pull_back_jet(ref, g.jacobian, g.h);
}

FeFunction FeFunction::operator-(const FeFunction& other) const {
  if (!mesh_.same_as(other.mesh_)) throw ArgumentError("FeFunction: mesh mismatch");
  return FeFunction(mesh_, coeffs_ - other.coeffs_);
}

FeFunction FeFunction::operator*(double c) const { return FeFunction(mesh_, coeffs_ * c); }

FeFunction interpolate(const Mesh& mesh, const std::function<std::array<double, 4>(double, double)>& f) {
  Vector c(kDofsPerNode * mesh.node_count());
  for (int n = 0; n < mesh.node_count(); ++n) {
    const auto xy = mesh.node_coords(n);
    const auto v = f(xy[0], xy[1]);
    for (int r = 0; r < 4; ++r) c[kDofsPerNode * n + r] = v[r];
  }
  return FeFunction(mesh, std::move(c));
}

DataField DataField::zero() { return constant(0.0); }

DataField DataField::constant(double c) {
  return {[c](const Vec2&) { return c; }, [](const Vec2&) { return Vec2(Vec2::Zero()); }};
}

DataField DataField::from(const FeFunction& f) {
  auto shared = std::make_shared<const FeFunction>(f);
  return {[shared](const Vec2& x) { return shared->eval(x).value; },
          [shared](const Vec2& x) { return Vec2(shared->eval(x).grad); }};
}

// ---------------------------------------------------------------------------

double e_distance(const FeFunction& u_hat, const FeFunction& u, const Domain& domain, Norm norm, int quad_order) {
  if (!u_hat.mesh().same_as(u.mesh())) throw ArgumentError("e_distance: functions live on different meshes");
  const FeFunction diff = u_hat - u;
  const Mesh& mesh = diff.mesh();
  const auto rule = gauss_legendre<double>(std::max(quad_order, kReferenceQuadOrder));
  std::vector<QuadPoint> points;
  double sum = 0.0;
  for (int e = 0; e < mesh.element_count(); ++e) {
    points.clear();
    element_volume_points(mesh, e, domain, rule, points);
    for (const auto& p : points) {
      const Jet j = pull_back_jet(diff.eval(p.xi), p.jacobian, p.h);
      double v = j.value * j.value;
      if (norm != Norm::L2) v += j.grad.squaredNorm();
      if (norm == Norm::H2) v += j.hess.squaredNorm();
      sum += p.weight * v;
    }
  }
  return std::sqrt(sum);
}

bool resolves_oscillation(const Mesh& mesh, const DomainSpec& spec) {
  return mesh.nx() * spec.epsilon >= 8.0 * spec.w_len * (1.0 - 1e-12);
}

}  // namespace steklov
