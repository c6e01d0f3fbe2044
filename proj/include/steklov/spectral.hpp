#pragma once

// Smallest eigenvalues of A q = d B q with A positive definite and B a positive
// semidefinite boundary form of low rank. Internally the pencil B q = mu A q is
// iterated for its largest mu = 1 / d, so the kernel of B never shows up.

#include "steklov/assembly.hpp"

#include <Eigen/Core>

#include <vector>

namespace steklov {

enum class EigenMethod { Auto, Dense, Iterative };

struct SteklovOptions {
  double tol = 1e-9;  // relative residual ||A q - d B q|| / ||A q||
  EigenMethod method = EigenMethod::Auto;
  int dense_threshold = 2000;  // Auto falls back to the dense path below this many dofs
  int max_iterations = 2000;
  // The iterative path starts from the block A^{-1} E, E spanning the rows where B is
  // nonzero, when n * rank(B) stays below this many entries (0 disables). That block
  // contains every eigenvector with mu > 0, so one Rayleigh-Ritz step is exact even
  // for clustered eigenvalues.
  long long range_block_limit = 40'000'000;
  unsigned seed = 20240611u;
  double cluster_gap = 1e-6;
};

struct SteklovSpectrum {
  std::vector<double> eigenvalues;  // ascending, repeated by multiplicity
  Eigen::MatrixXd modes;            // B-orthonormal columns
  std::vector<double> residuals;
  // Rounding floor of each residual evaluation; on fine or strongly graded meshes it
  // can exceed the tolerance, and a residual within 64 floors is accepted.
  std::vector<double> residual_floors;
  std::vector<int> cluster;  // cluster id per eigenvalue (relative gap below cluster_gap)
  int iterations = 0;        // 0 for the dense path

  int size() const { return static_cast<int>(eigenvalues.size()); }
  int multiplicity(int i) const;
  /// Residual i is below tol or within the accepted multiple of its rounding floor.
  bool certified(int i, double tol) const;
};

/// At most k eigenvalues (fewer when rank B < k). Throws NoSteklovEigenvalues when
/// B vanishes numerically and ConvergenceError when the iteration budget runs out.
SteklovSpectrum solve_steklov(const SparseMatrix& a, const SparseMatrix& b, int k, const SteklovOptions& options = {});
SteklovSpectrum solve_steklov(const FeSystem& a, const FeSystem& b, int k, const SteklovOptions& options = {});

/// q^T A q / q^T B q.
double rayleigh(const SparseMatrix& a, const SparseMatrix& b, const Eigen::VectorXd& q);

}  // namespace steklov
