#include "steklov/navier.hpp"

#include "steklov/errors.hpp"
#include "steklov/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace steklov {

namespace {

bool allowed(FormKind form, const EssentialBc& bc) {
  if (form == FormKind::LaplacianEnergy) return !bc.clamp_gamma && !bc.clamp_sigma;
  return form == FormKind::HessianEnergy && !(bc.clamp_gamma && bc.clamp_sigma);
}

// LDLT solve with one step of iterative refinement.
Vector solve_spd(const SparseMatrix& k, const Vector& rhs, double* residual) {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(k);
  if (ldlt.info() != Eigen::Success) throw SolverError("Navier system is singular or indefinite");
  Vector x = ldlt.solve(rhs);
  x += ldlt.solve(Vector(rhs - k * x));
  if (ldlt.info() != Eigen::Success) throw SolverError("Navier solve failed");
  const double norm = rhs.norm();
  *residual = norm > 0.0 ? (k * x - rhs).norm() / norm : (k * x).norm();
  return x;
}

NavierSolution finish(const Mesh& mesh, const Domain& domain, FormKind form, EssentialBc bc, const DofMap& dofs,
                      const SparseMatrix& k, const Vector& load) {
  double residual = 0.0;
  const Vector x = solve_spd(k, load, &residual);
  return NavierSolution{FeFunction::from_free(mesh, dofs, x), domain, form, bc, dofs, residual};
}

// Sorted, deduplicated breakpoints clipped to [lo, hi], endpoints included.
std::vector<double> breakpoints(double lo, double hi, std::vector<double> cuts) {
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  const double tol = 1e-12 * std::max(1.0, hi - lo);
  for (double c : cuts) {
    if (c < lo - tol || c > hi + tol) continue;
    c = std::clamp(c, lo, hi);
    if (out.empty() || c > out.back() + tol) out.push_back(c);
  }
  return out;
}

// Abscissa breakpoints: mesh nodes plus a uniform subdivision fine enough for g_eps.
std::vector<double> x_breakpoints(const std::vector<const Mesh*>& meshes, const Domain& domain, int per_period) {
  std::vector<double> cuts;
  for (const Mesh* m : meshes) cuts.insert(cuts.end(), m->xs().begin(), m->xs().end());
  const double w = meshes.front()->xs().back();
  if (!domain.is_reference()) {
    const double step = domain.diffeo()->spec().epsilon / per_period;
    const int n = static_cast<int>(std::ceil(w / step - 1e-9));
    for (int i = 1; i < n; ++i) cuts.push_back(i * step);
  }
  return breakpoints(0.0, w, std::move(cuts));
}

// Physical jet of the function represented by u_hat on the given domain, at physical x.
Jet physical_jet(const FeFunction& u_hat, const Domain& domain, const Vec2& x) {
  if (domain.is_reference()) return u_hat.eval(x);
  const DiffeoField& phi = *domain.diffeo();
  const Vec2 xi = phi.map(x);
  const Vec2 clamped(xi.x(), std::min(xi.y(), 0.0));
  return pull_back_jet(u_hat.eval(clamped), phi.jacobian(x), phi.h_jet(x));
}

int locate_1d(const std::vector<double>& nodes, double x) {
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const int i = static_cast<int>(it - nodes.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(nodes.size()) - 2);
}

std::vector<double> refine_nodes(const std::vector<double>& nodes, int refine) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    for (int k = 0; k < refine; ++k) out.push_back(nodes[i] + (nodes[i + 1] - nodes[i]) * k / refine);
  }
  out.push_back(nodes.back());
  return out;
}

}  // namespace

NavierSolution solve_navier(const Mesh& mesh, const Domain& domain, const DataField& f, FormKind form,
                            EssentialBc bc, int quad_order) {
  if (!allowed(form, bc)) {
    throw ArgumentError("solve_navier: supported are Laplacian/DirichletAll and Hessian/DirichletAll "
                        "with at most one of the clamps");
  }
  const DofMap dofs = make_dofmap(mesh, bc);
  const FeSystem a = assemble({form}, mesh, dofs, domain, quad_order);
  const Vector load = assemble_navier_load(f, mesh, dofs, domain, quad_order);
  return finish(mesh, domain, form, bc, dofs, a.matrix, load);
}

NavierSolution solve_navier_strange(const Mesh& mesh, const DataField& f, double gamma, int quad_order) {
  if (!(gamma >= 0.0)) throw ArgumentError("solve_navier_strange: gamma must be >= 0");
  const Domain domain = Domain::reference();
  const DofMap dofs = make_dofmap(mesh, EssentialBc::dirichlet_all());
  const FeSystem a = assemble({FormKind::HessianEnergy}, mesh, dofs, domain, quad_order);
  const FeSystem b = assemble({FormKind::NormalTrace, BoundaryPart::Gamma}, mesh, dofs, domain, quad_order);
  const SparseMatrix k = a.matrix + gamma * b.matrix;
  const Vector load = assemble_navier_load(f, mesh, dofs, domain, quad_order);
  return finish(mesh, domain, FormKind::HessianEnergy, EssentialBc::dirichlet_all(), dofs, k, load);
}

Vector normal_derivative_functional(const NavierSolution& solution) {
  const Mesh& mesh = solution.u.mesh();
  const DofMap full(mesh);
  // Rows: free dofs of u (test slot), columns: every Hermite dof (trial slot).
  const SparseMatrix l =
      assemble_matrix({FormKind::MixedUDelta}, mesh, solution.dofs, full, solution.domain) +
      assemble_matrix({FormKind::GradMass}, mesh, solution.dofs, full, solution.domain);
  const Vector free = solution.u.free_values(solution.dofs);
  return l.transpose() * free;
}

std::vector<double> NtnOperator::eigenvalues(int k) const {
  if (k < 1) throw ArgumentError("NtnOperator::eigenvalues: k must be >= 1");
  const Eigen::MatrixXd sym = 0.5 * (n + n.transpose());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, j0);
  if (es.info() != Eigen::Success) throw SolverError("NtN pencil eigensolver failed");
  std::vector<double> out;
  for (int i = static_cast<int>(es.eigenvalues().size()) - 1; i >= 0 && static_cast<int>(out.size()) < k; --i) {
    out.push_back(es.eigenvalues()[i]);
  }
  return out;
}

NtnOperator build_ntn(const Mesh& mesh, const Domain& domain, std::vector<int> boundary_basis, int quad_order) {
  const std::vector<int> trace = boundary_trace_dofs(mesh);
  if (boundary_basis.empty()) boundary_basis = trace;
  std::sort(boundary_basis.begin(), boundary_basis.end());
  boundary_basis.erase(std::unique(boundary_basis.begin(), boundary_basis.end()), boundary_basis.end());
  for (int d : boundary_basis) {
    if (!std::binary_search(trace.begin(), trace.end(), d)) {
      throw BasisError("build_ntn: dof " + std::to_string(d) + " has no boundary trace");
    }
  }

  const DofMap full(mesh);
  const int total = full.total();
  const int m = static_cast<int>(boundary_basis.size());

  // Discretely harmonic extension: the non-trace dofs minimize the Dirichlet energy.
  DofMap interior(mesh);
  for (int d : trace) interior.constrain(d);
  const SparseMatrix g_full = assemble({FormKind::GradMass}, mesh, full, domain, quad_order).matrix;
  const SparseMatrix g_ii = assemble({FormKind::GradMass}, mesh, interior, domain, quad_order).matrix;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(g_ii);
  if (ldlt.info() != Eigen::Success) throw SolverError("build_ntn: interior Dirichlet matrix is singular");
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(interior.free_count(), m);
  for (int c = 0; c < m; ++c) {
    const int t = boundary_basis[c];
    for (SparseMatrix::InnerIterator it(g_full, t); it; ++it) {
      const int fi = interior.free_index(static_cast<int>(it.row()));
      if (fi >= 0) rhs(fi, c) = -it.value();
    }
  }
  const Eigen::MatrixXd x_int = ldlt.solve(rhs);
  Eigen::MatrixXd ext = Eigen::MatrixXd::Zero(total, m);
  for (int c = 0; c < m; ++c) ext(boundary_basis[c], c) = 1.0;
  for (int fi = 0; fi < interior.free_count(); ++fi) ext.row(interior.free_dofs()[fi]) = x_int.row(fi);

  const DofMap navier = make_dofmap(mesh, EssentialBc::dirichlet_all());
  const SparseMatrix l = assemble_matrix({FormKind::MixedUDelta}, mesh, navier, full, domain, quad_order) +
                         assemble_matrix({FormKind::GradMass}, mesh, navier, full, domain, quad_order);
  const SparseMatrix a = assemble({FormKind::LaplacianEnergy}, mesh, navier, domain, quad_order).matrix;
  Eigen::SimplicialLDLT<SparseMatrix> la(a);
  if (la.info() != Eigen::Success) throw SolverError("build_ntn: Navier matrix is singular");
  const Eigen::MatrixXd le = l * ext;
  const Eigen::MatrixXd u = la.solve(le);

  NtnOperator op;
  op.n = le.transpose() * u;
  const SparseMatrix mass = assemble({FormKind::BoundaryMass, BoundaryPart::All}, mesh, full, domain, quad_order).matrix;
  op.j0 = ext.transpose() * (mass * ext);
  op.j0 = 0.5 * (op.j0 + op.j0.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(op.j0);
  const double scale = op.j0.diagonal().maxCoeff();
  if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 1e-7 * std::sqrt(scale))) {
    throw BasisError("build_ntn: boundary mass is rank deficient on the chosen basis");
  }
  op.extension = std::move(ext);
  op.basis = std::move(boundary_basis);
  return op;
}

double Q1Field::value(double x, double y) const {
  const int i = locate_1d(xs, x);
  const int j = locate_1d(ys, y);
  const double s = (x - xs[i]) / (xs[i + 1] - xs[i]);
  const double t = (y - ys[j]) / (ys[j + 1] - ys[j]);
  const int ny = static_cast<int>(ys.size());
  auto at = [&](int a, int b) { return values[(i + a) * ny + (j + b)]; };
  return (1 - s) * (1 - t) * at(0, 0) + s * (1 - t) * at(1, 0) + (1 - s) * t * at(0, 1) + s * t * at(1, 1);
}

Vec2 Q1Field::gradient(double x, double y) const {
  const int i = locate_1d(xs, x);
  const int j = locate_1d(ys, y);
  const double hx = xs[i + 1] - xs[i];
  const double hy = ys[j + 1] - ys[j];
  const double s = (x - xs[i]) / hx;
  const double t = (y - ys[j]) / hy;
  const int ny = static_cast<int>(ys.size());
  auto at = [&](int a, int b) { return values[(i + a) * ny + (j + b)]; };
  const double gx = ((1 - t) * (at(1, 0) - at(0, 0)) + t * (at(1, 1) - at(0, 1))) / hx;
  const double gy = ((1 - s) * (at(0, 1) - at(0, 0)) + s * (at(1, 1) - at(1, 0))) / hy;
  return Vec2(gx, gy);
}

Q1Field solve_mixed_splitting(const Mesh& mesh, const DataField& f, int refine) {
  if (refine < 1) throw ArgumentError("solve_mixed_splitting: refine must be >= 1");
  Q1Field out;
  out.xs = refine_nodes(mesh.xs(), refine);
  out.ys = refine_nodes(mesh.ys(), refine);
  const int nx = static_cast<int>(out.xs.size());
  const int ny = static_cast<int>(out.ys.size());
  const int n = nx * ny;
  auto id = [ny](int i, int j) { return i * ny + j; };

  std::vector<Eigen::Triplet<double>> kt;
  std::vector<Eigen::Triplet<double>> mt;
  for (int i = 0; i + 1 < nx; ++i) {
    const double hx = out.xs[i + 1] - out.xs[i];
    for (int j = 0; j + 1 < ny; ++j) {
      const double hy = out.ys[j + 1] - out.ys[j];
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const int ax = a / 2, ay = a % 2, bx = b / 2, by = b % 2;
          const double kx = (ax == bx ? 1.0 : -1.0) / hx;
          const double ky = (ay == by ? 1.0 : -1.0) / hy;
          const double mx = hx * (ax == bx ? 2.0 : 1.0) / 6.0;
          const double my = hy * (ay == by ? 2.0 : 1.0) / 6.0;
          kt.emplace_back(id(i + ax, j + ay), id(i + bx, j + by), kx * my + mx * ky);
          mt.emplace_back(id(i + ax, j + ay), id(i + bx, j + by), mx * my);
        }
      }
    }
  }
  SparseMatrix k(n, n);
  SparseMatrix mass(n, n);
  k.setFromTriplets(kt.begin(), kt.end());
  mass.setFromTriplets(mt.begin(), mt.end());

  std::vector<int> interior_index(n, -1);
  std::vector<int> interior;
  for (int i = 1; i + 1 < nx; ++i) {
    for (int j = 1; j + 1 < ny; ++j) {
      interior_index[id(i, j)] = static_cast<int>(interior.size());
      interior.push_back(id(i, j));
    }
  }
  const int ni = static_cast<int>(interior.size());
  std::vector<Eigen::Triplet<double>> it;
  for (int c = 0; c < k.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator e(k, c); e; ++e) {
      const int r = interior_index[e.row()];
      const int s = interior_index[e.col()];
      if (r >= 0 && s >= 0) it.emplace_back(r, s, e.value());
    }
  }
  SparseMatrix kii(ni, ni);
  kii.setFromTriplets(it.begin(), it.end());
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(kii);
  if (ldlt.info() != Eigen::Success) throw SolverError("solve_mixed_splitting: stiffness is singular");

  // v = f on the boundary, discretely harmonic inside.
  Vector v = Vector::Zero(n);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      if (interior_index[id(i, j)] < 0) v[id(i, j)] = f.value(Vec2(out.xs[i], out.ys[j]));
    }
  }
  const Vector kv = k * v;
  Vector rhs(ni);
  for (int r = 0; r < ni; ++r) rhs[r] = -kv[interior[r]];
  const Vector vi = ldlt.solve(rhs);
  for (int r = 0; r < ni; ++r) v[interior[r]] = vi[r];

  // Lap u = v with u = 0: int grad u . grad w = -int v w.
  const Vector mv = mass * v;
  for (int r = 0; r < ni; ++r) rhs[r] = -mv[interior[r]];
  const Vector ui = ldlt.solve(rhs);
  out.values = Vector::Zero(n);
  for (int r = 0; r < ni; ++r) out.values[interior[r]] = ui[r];
  return out;
}

double relative_h1_error(const FeFunction& u, const Q1Field& w) {
  const auto rule = gauss_legendre<double>(4);
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i + 1 < w.xs.size(); ++i) {
    const double hx = w.xs[i + 1] - w.xs[i];
    for (std::size_t j = 0; j + 1 < w.ys.size(); ++j) {
      const double hy = w.ys[j + 1] - w.ys[j];
      for (int a = 0; a < rule.size(); ++a) {
        for (int b = 0; b < rule.size(); ++b) {
          const double x = w.xs[i] + hx * rule.points[a];
          const double y = w.ys[j] + hy * rule.points[b];
          const double wt = hx * hy * rule.weights[a] * rule.weights[b];
          const Jet ju = u.eval(Vec2(x, y));
          const double wv = w.value(x, y);
          const Vec2 wg = w.gradient(x, y);
          err += wt * (std::pow(ju.value - wv, 2) + (ju.grad - wg).squaredNorm());
          ref += wt * (wv * wv + wg.squaredNorm());
        }
      }
    }
  }
  if (!(ref > 0.0)) throw ArgumentError("relative_h1_error: reference field vanishes");
  return std::sqrt(err / ref);
}

double ExtensionNorms::h1() const { return std::sqrt(l2 * l2 + grad * grad); }

ExtensionNorms zero_extension_distance(const NavierSolution& perturbed, const NavierSolution& limit,
                                       int gauss_points) {
  if (!limit.domain.is_reference()) throw ArgumentError("zero_extension_distance: limit must live on the rectangle");
  const Mesh& pm = perturbed.u.mesh();
  const Mesh& lm = limit.u.mesh();
  const Domain& domain = perturbed.domain;
  const DiffeoField* phi = domain.is_reference() ? nullptr : domain.diffeo();
  const auto rule = gauss_legendre<double>(gauss_points);
  const std::vector<double> xb = x_breakpoints({&pm, &lm}, domain, 8);

  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  double limit_h1 = 0.0;
  std::vector<double> cuts;
  for (std::size_t ix = 0; ix + 1 < xb.size(); ++ix) {
    const double hx = xb[ix + 1] - xb[ix];
    for (int a = 0; a < rule.size(); ++a) {
      const double x = xb[ix] + hx * rule.points[a];
      const double top = phi ? phi->spec().g(x) : 0.0;
      // Inner integral in y, split where either integrand loses smoothness.
      cuts.assign(lm.ys().begin(), lm.ys().end());
      cuts.push_back(0.0);
      if (phi) {
        cuts.push_back(phi->layer_bottom(x));
        for (double yj : pm.ys()) cuts.push_back(phi->inverse(Vec2(x, yj)).y());
      } else {
        cuts.insert(cuts.end(), pm.ys().begin(), pm.ys().end());
      }
      const std::vector<double> yb = breakpoints(-1.0, top, cuts);
      for (std::size_t iy = 0; iy + 1 < yb.size(); ++iy) {
        const double hy = yb[iy + 1] - yb[iy];
        for (int b = 0; b < rule.size(); ++b) {
          const Vec2 p(x, yb[iy] + hy * rule.points[b]);
          const double w = hx * hy * rule.weights[a] * rule.weights[b];
          const Jet ue = physical_jet(perturbed.u, domain, p);
          Jet u0;
          if (p.y() < 0.0) {
            u0 = limit.u.eval(p);
            limit_h1 += w * (u0.value * u0.value + u0.grad.squaredNorm());
          }
          acc[0] += w * std::pow(ue.value - u0.value, 2);
          acc[1] += w * (ue.grad - u0.grad).squaredNorm();
          acc[2] += w * std::pow(ue.laplacian() - u0.laplacian(), 2);
          acc[3] += w * (ue.hess - u0.hess).squaredNorm();
        }
      }
    }
  }
  ExtensionNorms out;
  out.l2 = std::sqrt(acc[0]);
  out.grad = std::sqrt(acc[1]);
  out.lap = std::sqrt(acc[2]);
  out.hess = std::sqrt(acc[3]);
  out.limit_h1 = std::sqrt(limit_h1);
  return out;
}

double gamma_normal_norm(const NavierSolution& solution, int gauss_points) {
  const Mesh& mesh = solution.u.mesh();
  const Domain& domain = solution.domain;
  const DiffeoField* phi = domain.is_reference() ? nullptr : domain.diffeo();
  const auto rule = gauss_legendre<double>(gauss_points);
  const std::vector<double> xb = x_breakpoints({&mesh}, domain, 16);
  double sum = 0.0;
  for (std::size_t ix = 0; ix + 1 < xb.size(); ++ix) {
    const double hx = xb[ix + 1] - xb[ix];
    for (int a = 0; a < rule.size(); ++a) {
      const double x = xb[ix] + hx * rule.points[a];
      const double g = phi ? phi->spec().g(x) : 0.0;
      const double dg = phi ? phi->spec().g(x, 1) : 0.0;
      const Vec2 p(x, g);
      const Jet ref = solution.u.eval(Vec2(x, 0.0));
      const Jet jet = phi ? pull_back_jet(ref, phi->jacobian(p), phi->h_jet(p)) : ref;
      const double stretch = std::sqrt(1.0 + dg * dg);
      const double un = (jet.grad.y() - dg * jet.grad.x()) / stretch;
      sum += hx * rule.weights[a] * un * un * stretch;
    }
  }
  return std::sqrt(sum);
}

}  // namespace steklov
