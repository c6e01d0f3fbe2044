#pragma once

// Structured tensor-product rectangle meshes of W x (-1, 0) and the 4-dof-per-node
// layout of the bicubic Hermite element.

#include <array>
#include <iosfwd>
#include <vector>

namespace steklov {

enum class BoundaryTag { Gamma, Sigma };

/// Element side, counterclockwise from the bottom.
enum class Side { Bottom = 0, Right = 1, Top = 2, Left = 3 };

struct BoundaryEdge {
  int element = 0;
  Side side = Side::Bottom;
  BoundaryTag tag = BoundaryTag::Sigma;
};

class Mesh {
 public:
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int node_count() const { return (nx_ + 1) * (ny_ + 1); }
  int element_count() const { return nx_ * ny_; }

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

  // Nodes are numbered column by column: node(i, j) = i (ny + 1) + j.
  int node(int i, int j) const { return i * (ny_ + 1) + j; }
  int element(int i, int j) const { return i * ny_ + j; }
  int element_column(int e) const { return e / ny_; }
  int element_row(int e) const { return e % ny_; }
  /// Nodes of element e counterclockwise from the lower-left corner.
  std::array<int, 4> element_nodes(int e) const;
  std::array<double, 2> node_coords(int n) const;

  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_; }

  /// Element containing (x, y); points outside are assigned to the nearest element.
  int locate(double x, double y) const;

  bool same_as(const Mesh& other) const;

  friend Mesh build_mesh(int nx, int ny, double grading, double w_len);

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<BoundaryEdge> boundary_;
};

/// Uniform in x over (0, w_len); vertical spacings h_j = h_0 q^j, finest at x_N = 0.
Mesh build_mesh(int nx, int ny, double grading = 1.0, double w_len = 1.0);

/// Plain-text listing: `node i x y` and `elem e n0 n1 n2 n3` lines.
void dump_mesh(const Mesh& mesh, std::ostream& out);

enum class DofRole { Value = 0, Dx = 1, Dy = 2, Dxy = 3 };

inline constexpr int kDofsPerNode = 4;

inline int global_dof(int node, DofRole role) { return kDofsPerNode * node + static_cast<int>(role); }

/// Essential boundary conditions. DirichletAll (u = 0 on the whole boundary) is
/// always imposed; the clamp flags additionally set u_nu = 0 on Gamma / Sigma.
struct EssentialBc {
  bool clamp_gamma = false;
  bool clamp_sigma = false;

  static EssentialBc dirichlet_all() { return {}; }
  static EssentialBc clamp_on_gamma() { return {true, false}; }
  static EssentialBc clamp_on_sigma() { return {false, true}; }
  static EssentialBc clamp_everywhere() { return {true, true}; }
};

class DofMap {
 public:
  /// All 4 (nx+1)(ny+1) dofs free.
  explicit DofMap(const Mesh& mesh);

  int total() const { return static_cast<int>(constrained_.size()); }
  int free_count() const { return static_cast<int>(free_to_global_.size()); }
  bool constrained(int dof) const { return constrained_[dof]; }
  /// Free index of a global dof, or -1 when constrained.
  int free_index(int dof) const { return global_to_free_[dof]; }
  const std::vector<int>& free_dofs() const { return free_to_global_; }
  std::vector<int> constrained_dofs() const;

  void constrain(int dof);

  friend DofMap mark_essential(const Mesh& mesh, DofMap dofs, EssentialBc bc);

 private:
  void renumber();

  std::vector<bool> constrained_;
  std::vector<int> global_to_free_;
  std::vector<int> free_to_global_;
};

DofMap mark_essential(const Mesh& mesh, DofMap dofs, EssentialBc bc);

inline DofMap make_dofmap(const Mesh& mesh, EssentialBc bc) { return mark_essential(mesh, DofMap(mesh), bc); }

/// Dofs whose shape functions have a nonzero boundary trace: value and tangential
/// derivatives at boundary nodes (both first derivatives at corners).
std::vector<int> boundary_trace_dofs(const Mesh& mesh);

}  // namespace steklov
