#include "steklov/spectral.hpp"

#include "steklov/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace steklov {

namespace {

constexpr double kFloorFactor = 64.0;

double max_entry(const SparseMatrix& m) {
  double out = 0.0;
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) out = std::max(out, std::abs(it.value()));
  }
  return out;
}

std::vector<int> nonzero_rows(const SparseMatrix& m, double threshold) {
  std::vector<char> seen(m.rows(), 0);
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      if (std::abs(it.value()) > threshold) seen[it.row()] = 1;
    }
  }
  std::vector<int> rows;
  for (int i = 0; i < static_cast<int>(seen.size()); ++i) {
    if (seen[i]) rows.push_back(i);
  }
  return rows;
}

double residual(const SparseMatrix& a, const SparseMatrix& b, const Eigen::VectorXd& q, double d) {
  const Eigen::VectorXd aq = a * q;
  return (aq - d * (b * q)).norm() / aq.norm();
}

// Rounding error of evaluating the residual itself: u || |A| |q| + d |B| |q| || / ||A q||.
double residual_floor(const SparseMatrix& a, const SparseMatrix& b, const Eigen::VectorXd& q, double d) {
  const Eigen::VectorXd qa = q.cwiseAbs();
  const Eigen::VectorXd bound = a.cwiseAbs() * qa + d * (b.cwiseAbs() * qa);
  return std::numeric_limits<double>::epsilon() * bound.norm() / (a * q).norm();
}

// Accepts a residual at the tolerance or within a small multiple of its rounding floor.
bool certified(double r, double floor, double tol) { return r <= std::max(tol, kFloorFactor * floor); }

// Normalizes modes, fixes signs, sorts ascending in d and fills residuals and clusters.
SteklovSpectrum finish(const SparseMatrix& a, const SparseMatrix& b, std::vector<double> mus, Eigen::MatrixXd vecs,
                       const SteklovOptions& options) {
  const int m = static_cast<int>(mus.size());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return mus[i] > mus[j]; });
  SteklovSpectrum out;
  out.modes.resize(a.rows(), m);
  for (int k = 0; k < m; ++k) {
    Eigen::VectorXd q = vecs.col(order[k]);
    q /= std::sqrt(q.dot(b * q));
    Eigen::Index imax = 0;
    q.cwiseAbs().maxCoeff(&imax);
    if (q[imax] < 0.0) q = -q;
    const double d = 1.0 / mus[order[k]];
    out.eigenvalues.push_back(d);
    out.residuals.push_back(residual(a, b, q, d));
    out.residual_floors.push_back(residual_floor(a, b, q, d));
    out.modes.col(k) = q;
  }
  int id = 0;
  for (int k = 0; k < m; ++k) {
    if (k > 0 && (out.eigenvalues[k] - out.eigenvalues[k - 1]) > options.cluster_gap * out.eigenvalues[k]) ++id;
    out.cluster.push_back(id);
  }
  return out;
}

SteklovSpectrum solve_dense(const SparseMatrix& a, const SparseMatrix& b, int k, const SteklovOptions& options) {
  const Eigen::MatrixXd ad(a);
  const Eigen::MatrixXd bd(b);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(bd, ad);
  if (es.info() != Eigen::Success) throw SolverError("dense generalized eigensolver failed (A not positive definite?)");
  const Eigen::VectorXd& mu = es.eigenvalues();
  const int n = static_cast<int>(mu.size());
  const double mu_max = mu[n - 1];
  std::vector<double> mus;
  std::vector<int> cols;
  for (int i = n - 1; i >= 0 && static_cast<int>(mus.size()) < k; --i) {
    if (!(mu[i] > 1e-10 * mu_max)) break;
    mus.push_back(mu[i]);
    cols.push_back(i);
  }
  Eigen::MatrixXd vecs(a.rows(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) vecs.col(c) = es.eigenvectors().col(cols[c]);
  return finish(a, b, std::move(mus), std::move(vecs), options);
}

// Ritz pairs of the pencil on the block Z = A^{-1} E. B lives on the rows of E, so
// with G = E^T Z and B_EE = E^T B E the projected pencil is (G B_EE G) c = mu G c and
// its positive pairs are exact. Only the leading `keep` vectors are formed.
struct RangeStep {
  std::vector<double> mus;
  Eigen::MatrixXd vecs;
};

RangeStep range_step(const Eigen::SimplicialLDLT<SparseMatrix>& ldlt, const SparseMatrix& b,
                     const std::vector<int>& rows, int keep) {
  const int n = static_cast<int>(b.rows());
  const int r = static_cast<int>(rows.size());
  std::vector<int> local(n, -1);
  for (int j = 0; j < r; ++j) local[rows[j]] = j;
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, r);
  for (int j = 0; j < r; ++j) e(rows[j], j) = 1.0;
  const Eigen::MatrixXd z = ldlt.solve(e);
  e.resize(0, 0);
  Eigen::MatrixXd g(r, r);
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < r; ++i) g(i, j) = z(rows[i], j);
  }
  g = (0.5 * (g + g.transpose())).eval();
  Eigen::MatrixXd bee = Eigen::MatrixXd::Zero(r, r);
  for (int c = 0; c < b.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(b, c); it; ++it) {
      if (local[it.row()] >= 0 && local[it.col()] >= 0) bee(local[it.row()], local[it.col()]) = it.value();
    }
  }
  const Eigen::MatrixXd gbg = g * bee * g;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gbg + gbg.transpose()), g);
  if (es.info() != Eigen::Success) throw SolverError("range-block Rayleigh-Ritz step failed");
  RangeStep out;
  out.vecs = z * es.eigenvectors().rightCols(keep).rowwise().reverse();
  for (int j = 0; j < keep; ++j) out.mus.push_back(es.eigenvalues()[r - 1 - j]);
  return out;
}

SteklovSpectrum solve_iterative(const SparseMatrix& a, const SparseMatrix& b, int k, const std::vector<int>& rows,
                                const SteklovOptions& options) {
  const int n = static_cast<int>(a.rows());
  const int rank_bound = static_cast<int>(rows.size());
  k = std::min(k, rank_bound);
  const int p = std::min({n, rank_bound, std::max(2 * k, k + 8)});
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw SolverError("sparse factorization of A failed");

  std::vector<double> best(k, std::numeric_limits<double>::infinity());
  const auto check = [&](const std::vector<double>& mu, const Eigen::MatrixXd& vecs) {
    bool converged = true;
    for (int j = 0; j < k; ++j) {
      if (!(mu[j] > 0.0)) {
        converged = false;
        continue;
      }
      const double d = 1.0 / mu[j];
      const double r = residual(a, b, vecs.col(j), d);
      best[j] = std::min(best[j], r);
      converged = converged && certified(r, residual_floor(a, b, vecs.col(j), d), options.tol);
    }
    return converged;
  };

  Eigen::MatrixXd x(n, p);
  int first = 1;
  if (options.range_block_limit > 0 && static_cast<long long>(n) * rank_bound <= options.range_block_limit) {
    RangeStep step = range_step(ldlt, b, rows, p);
    // Exact positive pairs are all that rank B allows; zero mus mean rank B < k.
    int positive = 0;
    while (positive < k && step.mus[positive] > 1e-10 * step.mus[0]) ++positive;
    if (positive < k) {
      k = positive;
      best.resize(k);
    }
    if (k == 0) return SteklovSpectrum{};
    if (check(step.mus, step.vecs)) {
      std::vector<double> top(step.mus.begin(), step.mus.begin() + k);
      SteklovSpectrum out = finish(a, b, std::move(top), step.vecs.leftCols(k), options);
      out.iterations = 1;
      return out;
    }
    // Rounding only: polish with ordinary subspace iteration from the Ritz vectors.
    x = step.vecs.leftCols(p);
    first = 2;
  } else {
    std::mt19937 rng(options.seed);
    std::normal_distribution<double> gauss;
    for (int j = 0; j < p; ++j) {
      for (int i = 0; i < n; ++i) x(i, j) = gauss(rng);
    }
  }

  std::vector<double> mus(p);
  for (int it = first; it <= options.max_iterations; ++it) {
    const Eigen::MatrixXd y = ldlt.solve(Eigen::MatrixXd(b * x));
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    const Eigen::MatrixXd ar = q.transpose() * (a * q);
    const Eigen::MatrixXd br = q.transpose() * (b * q);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (br + br.transpose()),
                                                                 0.5 * (ar + ar.transpose()));
    if (es.info() != Eigen::Success) throw SolverError("Rayleigh-Ritz step failed");
    // Largest mu first.
    x = q * es.eigenvectors().rowwise().reverse();
    for (int j = 0; j < p; ++j) mus[j] = es.eigenvalues()[p - 1 - j];
    if (check(mus, x)) {
      std::vector<double> top(mus.begin(), mus.begin() + k);
      SteklovSpectrum out = finish(a, b, std::move(top), x.leftCols(k), options);
      out.iterations = it;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "subspace iteration did not reach tol = " << options.tol << " in " << options.max_iterations
      << " iterations";
  throw ConvergenceError(msg.str(), best);
}

}  // namespace

bool SteklovSpectrum::certified(int i, double tol) const {
  return steklov::certified(residuals.at(i), residual_floors.at(i), tol);
}

int SteklovSpectrum::multiplicity(int i) const {
  return static_cast<int>(std::count(cluster.begin(), cluster.end(), cluster.at(i)));
}

SteklovSpectrum solve_steklov(const SparseMatrix& a, const SparseMatrix& b, int k, const SteklovOptions& options) {
  if (k < 1) throw ArgumentError("solve_steklov: k must be >= 1");
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw ArgumentError("solve_steklov: A and B must be square of equal size");
  }
  // Symmetric Jacobi scaling by diag(A)^{-1/2}: the Hermite dofs mix values and
  // derivatives, so raw entries span many orders of magnitude on graded meshes.
  const Eigen::VectorXd diag = a.diagonal();
  if (!(diag.minCoeff() > 0.0)) throw SolverError("solve_steklov: A has a nonpositive diagonal entry");
  const Eigen::VectorXd scale = diag.cwiseSqrt().cwiseInverse();
  const SparseMatrix as = scale.asDiagonal() * a * scale.asDiagonal();
  const SparseMatrix bs = scale.asDiagonal() * b * scale.asDiagonal();
  const double b_max = max_entry(bs);
  if (!(b_max > 1e-14)) throw NoSteklovEigenvalues("boundary form B vanishes on the free dofs");
  const std::vector<int> rows = nonzero_rows(bs, 1e-14 * b_max);

  SteklovSpectrum scaled;
  if (options.method == EigenMethod::Dense) {
    scaled = solve_dense(as, bs, k, options);
  } else if (options.method == EigenMethod::Iterative || a.rows() >= options.dense_threshold) {
    scaled = solve_iterative(as, bs, k, rows, options);
  } else {
    try {
      scaled = solve_iterative(as, bs, k, rows, options);
    } catch (const ConvergenceError&) {
      scaled = solve_dense(as, bs, k, options);
    }
  }
  if (scaled.size() == 0) throw NoSteklovEigenvalues("pencil has no finite eigenvalues");
  std::vector<double> mus;
  for (double d : scaled.eigenvalues) mus.push_back(1.0 / d);
  SteklovSpectrum out = finish(a, b, std::move(mus), scale.asDiagonal() * scaled.modes, options);
  out.iterations = scaled.iterations;
  return out;
}

SteklovSpectrum solve_steklov(const FeSystem& a, const FeSystem& b, int k, const SteklovOptions& options) {
  if (!a.mesh.same_as(b.mesh) || a.dofs.free_dofs() != b.dofs.free_dofs()) {
    throw ArgumentError("solve_steklov: systems use different discretizations");
  }
  return solve_steklov(a.matrix, b.matrix, k, options);
}

double rayleigh(const SparseMatrix& a, const SparseMatrix& b, const Eigen::VectorXd& q) {
  const double denom = q.dot(b * q);
  if (!(denom > 1e-14 * max_entry(b) * q.squaredNorm())) {
    throw ArgumentError("rayleigh: q^T B q vanishes, quotient undefined");
  }
  return q.dot(a * q) / denom;
}

}  // namespace steklov
