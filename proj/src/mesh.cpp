#include "steklov/mesh.hpp"

#include "steklov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace steklov {

std::array<int, 4> Mesh::element_nodes(int e) const {
  const int i = element_column(e);
  const int j = element_row(e);
  return {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
}

std::array<double, 2> Mesh::node_coords(int n) const {
  return {xs_[n / (ny_ + 1)], ys_[n % (ny_ + 1)]};
}

int Mesh::locate(double x, double y) const {
  const auto ix = std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin() - 1;
  const auto iy = std::upper_bound(ys_.begin(), ys_.end(), y) - ys_.begin() - 1;
  const int i = std::clamp(static_cast<int>(ix), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(iy), 0, ny_ - 1);
  return element(i, j);
}

bool Mesh::same_as(const Mesh& other) const {
  return nx_ == other.nx_ && ny_ == other.ny_ && xs_ == other.xs_ && ys_ == other.ys_;
}

Mesh build_mesh(int nx, int ny, double grading, double w_len) {
  if (nx < 1 || ny < 1) throw ArgumentError("build_mesh: element counts must be >= 1");
  if (!(grading > 0.0 && grading <= 1.0)) throw ArgumentError("build_mesh: grading must lie in (0, 1]");
  if (!(w_len > 0.0)) throw ArgumentError("build_mesh: W length must be positive");
  Mesh mesh;
  mesh.nx_ = nx;
  mesh.ny_ = ny;
  mesh.xs_.resize(nx + 1);
  for (int i = 0; i <= nx; ++i) mesh.xs_[i] = w_len * static_cast<double>(i) / nx;
  mesh.xs_[nx] = w_len;

  // Bottom spacing h_0 with sum_j h_0 q^j = 1.
  std::vector<double> spacing(ny);
  double total = 0.0;
  for (int j = 0; j < ny; ++j) {
    spacing[j] = std::pow(grading, j);
    total += spacing[j];
  }
  mesh.ys_.resize(ny + 1);
  mesh.ys_[0] = -1.0;
  double acc = 0.0;
  for (int j = 0; j < ny; ++j) {
    acc += spacing[j] / total;
    mesh.ys_[j + 1] = -1.0 + acc;
  }
  mesh.ys_[ny] = 0.0;

  for (int i = 0; i < nx; ++i) {
    mesh.boundary_.push_back({mesh.element(i, 0), Side::Bottom, BoundaryTag::Sigma});
    mesh.boundary_.push_back({mesh.element(i, ny - 1), Side::Top, BoundaryTag::Gamma});
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_.push_back({mesh.element(0, j), Side::Left, BoundaryTag::Sigma});
    mesh.boundary_.push_back({mesh.element(nx - 1, j), Side::Right, BoundaryTag::Sigma});
  }
  return mesh;
}

void dump_mesh(const Mesh& mesh, std::ostream& out) {
  for (int n = 0; n < mesh.node_count(); ++n) {
    const auto c = mesh.node_coords(n);
    out << "node " << n << ' ' << c[0] << ' ' << c[1] << '\n';
  }
  for (int e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    out << "elem " << e << ' ' << nodes[0] << ' ' << nodes[1] << ' ' << nodes[2] << ' ' << nodes[3] << '\n';
  }
}

DofMap::DofMap(const Mesh& mesh) : constrained_(kDofsPerNode * mesh.node_count(), false) { renumber(); }

std::vector<int> DofMap::constrained_dofs() const {
  std::vector<int> out;
  for (int d = 0; d < total(); ++d) {
    if (constrained_[d]) out.push_back(d);
  }
  return out;
}

void DofMap::constrain(int dof) {
  if (dof < 0 || dof >= total()) throw ArgumentError("DofMap::constrain: dof out of range");
  constrained_[dof] = true;
  renumber();
}

void DofMap::renumber() {
  global_to_free_.assign(constrained_.size(), -1);
  free_to_global_.clear();
  for (int d = 0; d < static_cast<int>(constrained_.size()); ++d) {
    if (!constrained_[d]) {
      global_to_free_[d] = static_cast<int>(free_to_global_.size());
      free_to_global_.push_back(d);
    }
  }
}

DofMap mark_essential(const Mesh& mesh, DofMap dofs, EssentialBc bc) {
  if (dofs.total() != kDofsPerNode * mesh.node_count()) {
    throw ArgumentError("mark_essential: dof map does not belong to this mesh");
  }
  const int nx = mesh.nx();
  const int ny = mesh.ny();
  auto fix = [&](int n, DofRole r) { dofs.constrained_[global_dof(n, r)] = true; };
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      const bool vertical = i == 0 || i == nx;    // on a lateral side (Sigma)
      const bool bottom = j == 0;                 // on the bottom (Sigma)
      const bool top = j == ny;                   // on Gamma
      if (!vertical && !bottom && !top) continue;
      const int n = mesh.node(i, j);
      fix(n, DofRole::Value);
      // u = 0 along an edge kills the tangential derivative.
      if (bottom || top) fix(n, DofRole::Dx);
      if (vertical) fix(n, DofRole::Dy);
      // u_xy stays free at corners: vanishing of u on both edges does not constrain it.
      if (bc.clamp_gamma && top) {
        fix(n, DofRole::Dy);
        fix(n, DofRole::Dxy);
      }
      if (bc.clamp_sigma) {
        if (bottom) {
          fix(n, DofRole::Dy);
          fix(n, DofRole::Dxy);
        }
        if (vertical) {
          fix(n, DofRole::Dx);
          fix(n, DofRole::Dxy);
        }
      }
    }
  }
  dofs.renumber();
  return dofs;
}

std::vector<int> boundary_trace_dofs(const Mesh& mesh) {
  std::vector<int> out;
  const int nx = mesh.nx();
  const int ny = mesh.ny();
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      const bool vertical = i == 0 || i == nx;
      const bool horizontal = j == 0 || j == ny;
      if (!vertical && !horizontal) continue;
      const int n = mesh.node(i, j);
      out.push_back(global_dof(n, DofRole::Value));
      if (horizontal) out.push_back(global_dof(n, DofRole::Dx));
      if (vertical) out.push_back(global_dof(n, DofRole::Dy));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace steklov
