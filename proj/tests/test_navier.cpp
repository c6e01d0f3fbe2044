#include "steklov/errors.hpp"
#include "steklov/navier.hpp"

#include <gtest/gtest.h>

#include "steklov/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace steklov;

namespace {

constexpr double kPi = std::numbers::pi;

// u = sin(pi x) y sinh(pi (y + 1)) is biharmonic, vanishes on the boundary and has
// Lap u = 2 pi sin(pi x) cosh(pi (y + 1)).
DataField analytic_data() {
  return {[](const Vec2& p) { return 2 * kPi * std::sin(kPi * p.x()) * std::cosh(kPi * (p.y() + 1)); },
          [](const Vec2& p) {
            return Vec2(2 * kPi * kPi * std::cos(kPi * p.x()) * std::cosh(kPi * (p.y() + 1)),
                        2 * kPi * kPi * std::sin(kPi * p.x()) * std::sinh(kPi * (p.y() + 1)));
          }};
}

FeFunction analytic_interpolant(const Mesh& m) {
  return interpolate(m, [](double x, double y) {
    const double s = std::sinh(kPi * (y + 1));
    const double c = std::cosh(kPi * (y + 1));
    const double yy = y * s;
    const double dy = s + kPi * y * c;
    return std::array<double, 4>{std::sin(kPi * x) * yy, kPi * std::cos(kPi * x) * yy, std::sin(kPi * x) * dy,
                                 kPi * std::cos(kPi * x) * dy};
  });
}

DataField sine_data() {
  return {[](const Vec2& p) { return std::sin(kPi * p.x()); },
          [](const Vec2& p) { return Vec2(kPi * std::cos(kPi * p.x()), 0.0); }};
}

Domain wavy(double eps, double alpha) {
  DomainSpec spec;
  spec.epsilon = eps;
  spec.profile = BoundaryProfile::fourier_cosine({1.0, 1.0}, alpha);
  return Domain::pulled_back(build_diffeo(spec, FlatLayer{0.25}));
}

}  // namespace

TEST(Navier, ZeroDataGivesZero) {
  const Mesh m = build_mesh(4, 4);
  const auto s = solve_navier(m, Domain::reference(), DataField::zero(), FormKind::LaplacianEnergy);
  EXPECT_EQ(s.u.coefficients().norm(), 0.0);
  EXPECT_TRUE(normal_derivative_functional(s).isZero(0.0));
}

TEST(Navier, RejectsUnsupportedCombinations) {
  const Mesh m = build_mesh(4, 4);
  EXPECT_THROW(solve_navier(m, Domain::reference(), sine_data(), FormKind::LaplacianEnergy,
                            EssentialBc::clamp_on_sigma()),
               ArgumentError);
  EXPECT_THROW(solve_navier(m, Domain::reference(), sine_data(), FormKind::LaplacianEnergy,
                            EssentialBc::clamp_on_gamma()),
               ArgumentError);
  EXPECT_THROW(solve_navier(m, Domain::reference(), sine_data(), FormKind::HessianEnergy,
                            EssentialBc::clamp_everywhere()),
               ArgumentError);
  EXPECT_THROW(solve_navier(m, Domain::reference(), sine_data(), FormKind::Mass), ArgumentError);
}

TEST(Navier, GalerkinResidualAgainstRandomTests) {
  const Mesh m = build_mesh(64, 8, 0.8);
  const Domain d = wavy(0.125, 2.0);
  for (FormKind form : {FormKind::LaplacianEnergy, FormKind::HessianEnergy}) {
    const auto s = solve_navier(m, d, sine_data(), form);
    const SparseMatrix a = assemble({form}, m, s.dofs, d).matrix;
    const Vector load = assemble_navier_load(sine_data(), m, s.dofs, d);
    const Vector u = s.u.free_values(s.dofs);
    // Backward-stable level: unit roundoff times || |A| |u| || / ||F||.
    const double floor = 1.1e-16 * (SparseMatrix(a.cwiseAbs()) * u.cwiseAbs()).norm() / load.norm();
    EXPECT_LE(s.residual, 4.0 * floor);
    EXPECT_LE(s.residual, 1e-8);
    std::mt19937 rng(3);
    std::normal_distribution<double> gauss;
    for (int t = 0; t < 20; ++t) {
      Vector phi(u.size());
      for (int i = 0; i < phi.size(); ++i) phi[i] = gauss(rng);
      const double energy = std::sqrt(phi.dot(a * phi));
      EXPECT_LE(std::abs(phi.dot(a * u) - phi.dot(load)), 1e-9 * energy);
    }
  }
}

TEST(Navier, ConstrainedDofsVanish) {
  const Mesh m = build_mesh(6, 6);
  const auto s = solve_navier(m, Domain::reference(), sine_data(), FormKind::HessianEnergy,
                              EssentialBc::clamp_on_sigma());
  for (int d : s.dofs.constrained_dofs()) EXPECT_EQ(s.u.coefficients()[d], 0.0);
}

TEST(Navier, ReproducesAnalyticSolution) {
  std::vector<double> errors;
  for (int n : {4, 8, 16}) {
    const Mesh m = build_mesh(n, n);
    const auto s = solve_navier(m, Domain::reference(), analytic_data(), FormKind::LaplacianEnergy);
    const FeFunction exact = analytic_interpolant(m);
    errors.push_back(e_distance(s.u, exact, Domain::reference(), Norm::H2) /
                     e_distance(exact, FeFunction::zero(m), Domain::reference(), Norm::H2));
  }
  EXPECT_LE(errors.back(), 1e-3);
  EXPECT_LT(errors[2], errors[1]);
  EXPECT_LT(errors[1], errors[0]);
}

TEST(Navier, HessianAndLaplacianAgreeOnRectangle) {
  const Mesh m = build_mesh(8, 8, 0.8);
  const auto sl = solve_navier(m, Domain::reference(), sine_data(), FormKind::LaplacianEnergy);
  const auto sh = solve_navier(m, Domain::reference(), sine_data(), FormKind::HessianEnergy);
  EXPECT_LE((sl.u.coefficients() - sh.u.coefficients()).norm(), 1e-9 * sl.u.coefficients().norm());
}

TEST(NormalDerivative, VanishesForInteriorAndTraceFreeTests) {
  const Mesh m = build_mesh(8, 8);
  const auto s = solve_navier(m, Domain::reference(), sine_data(), FormKind::LaplacianEnergy);
  const Vector nu = normal_derivative_functional(s);
  const std::vector<int> trace = boundary_trace_dofs(m);
  const double scale = nu.cwiseAbs().maxCoeff();
  for (int d = 0; d < nu.size(); ++d) {
    if (!std::binary_search(trace.begin(), trace.end(), d)) EXPECT_LE(std::abs(nu[d]), 1e-10 * scale) << d;
  }
}

TEST(NormalDerivative, MatchesSurfaceQuadrature) {
  std::vector<double> errors;
  for (int n : {16, 32}) {
    const Mesh m = build_mesh(n, n);
    const auto s = solve_navier(m, Domain::reference(), analytic_data(), FormKind::LaplacianEnergy);
    const Vector nu = normal_derivative_functional(s);
    // Value hat at the top node above x = 1/4: its trace is the cubic Hermite bump.
    const int node = m.node(n / 4, n);
    const double h = 1.0 / n;
    const auto rule = gauss_legendre<double>(8);
    double oracle = 0.0;
    for (int side : {-1, 1}) {
      for (int q = 0; q < rule.size(); ++q) {
        const double t = rule.points[q];
        const double x = 0.25 + side * h * t;
        const double bump = 1.0 - 3 * t * t + 2 * t * t * t;
        oracle += h * rule.weights[q] * std::sin(kPi * x) * std::sinh(kPi) * bump;
      }
    }
    errors.push_back(std::abs(nu[global_dof(node, DofRole::Value)] - oracle) / std::abs(oracle));
  }
  EXPECT_LE(errors[1], 5e-2);
  EXPECT_LE(errors[1], errors[0]);
}

TEST(Ntn, MatchesDirectSteklovSolve) {
  const Mesh m = build_mesh(16, 16);
  const NtnOperator op = build_ntn(m, Domain::reference());
  const auto mu = op.eigenvalues(3);
  const DofMap d = make_dofmap(m, EssentialBc::dirichlet_all());
  const auto s = solve_steklov(assemble({FormKind::LaplacianEnergy}, m, d, Domain::reference()),
                               assemble({FormKind::NormalTrace, BoundaryPart::All}, m, d, Domain::reference()), 3);
  for (int i = 0; i < 3; ++i) {
    EXPECT_GT(mu[i], 0.0);
    EXPECT_NEAR(1.0 / mu[i] / s.eigenvalues[i], 1.0, 1e-6);
  }
}

TEST(Ntn, SymmetricWithDefiniteBoundaryMass) {
  const Mesh m = build_mesh(8, 6, 0.8);
  const NtnOperator op = build_ntn(m, Domain::reference());
  EXPECT_LE((op.n - op.n.transpose()).norm(), 1e-10 * op.n.norm());
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(op.j0).eigenvalues().minCoeff(), 0.0);
  EXPECT_EQ(op.size(), static_cast<int>(boundary_trace_dofs(m).size()));
}

TEST(Ntn, BasisHandling) {
  const Mesh m = build_mesh(8, 8);
  const std::vector<int> trace = boundary_trace_dofs(m);
  const double full = build_ntn(m, Domain::reference()).eigenvalues(1)[0];
  std::vector<int> shuffled(trace.rbegin(), trace.rend());
  shuffled.push_back(trace.front());
  EXPECT_NEAR(build_ntn(m, Domain::reference(), shuffled).eigenvalues(1)[0], full, 1e-8 * full);
  const std::vector<int> half(trace.begin(), trace.begin() + trace.size() / 2);
  EXPECT_LE(build_ntn(m, Domain::reference(), half).eigenvalues(1)[0], full * (1 + 1e-10));
  EXPECT_THROW(build_ntn(m, Domain::reference(), {global_dof(m.node(4, 4), DofRole::Value)}), BasisError);
}

TEST(MixedSplitting, AgreesWithHermiteSolveUpToOracleError) {
  std::vector<double> errors;
  for (int n : {16, 32}) {
    const Mesh m = build_mesh(n, n);
    const auto s = solve_navier(m, Domain::reference(), sine_data(), FormKind::LaplacianEnergy);
    errors.push_back(relative_h1_error(s.u, solve_mixed_splitting(m, sine_data(), 4)));
  }
  EXPECT_LE(errors[0], 2.5e-2);
  // First-order decay: the bilinear oracle dominates the discrepancy.
  EXPECT_NEAR(errors[1] / errors[0], 0.5, 0.05);
  const Mesh m = build_mesh(16, 16);
  const auto s = solve_navier(m, Domain::reference(), sine_data(), FormKind::LaplacianEnergy);
  EXPECT_NEAR(relative_h1_error(s.u, solve_mixed_splitting(m, sine_data(), 8)) / errors[0], 0.5, 0.05);
}

TEST(Q1Field, InterpolatesBilinearly) {
  Q1Field f;
  f.xs = {0.0, 1.0};
  f.ys = {-1.0, 0.0};
  f.values = Vector::Zero(4);
  f.values << 0.0, 1.0, 2.0, 3.0;  // (x, y) -> 2 x + (y + 1)
  EXPECT_NEAR(f.value(0.25, -0.5), 1.0, 1e-15);
  EXPECT_NEAR((f.gradient(0.3, -0.2) - Vec2(2.0, 1.0)).norm(), 0.0, 1e-14);
}

TEST(ExtensionNorms, VanishForIdenticalProblems) {
  const Mesh m = build_mesh(8, 8, 0.8);
  const auto s = solve_navier(m, Domain::reference(), sine_data(), FormKind::LaplacianEnergy);
  const auto zero = zero_extension_distance(s, s);
  EXPECT_LE(zero.h1(), 1e-13);
  EXPECT_LE(zero.hess, 1e-12);
  EXPECT_GT(zero.limit_h1, 0.0);

  DomainSpec flat;
  flat.epsilon = 0.125;
  flat.profile = BoundaryProfile::fourier_cosine({0.0}, 2.0);
  const auto sf = solve_navier(m, Domain::pulled_back(build_diffeo(flat, FlatLayer{0.25})), sine_data(),
                               FormKind::LaplacianEnergy);
  EXPECT_LE(zero_extension_distance(sf, s).lap, 1e-9);

  const auto z = solve_navier(m, Domain::reference(), DataField::zero(), FormKind::LaplacianEnergy);
  const auto nz = zero_extension_distance(z, z);
  EXPECT_EQ(nz.l2 + nz.grad + nz.lap + nz.hess, 0.0);
}

TEST(ExtensionNorms, SeeTheBumpRegion) {
  // u_eps on Omega_eps against the zero function: the norms reduce to those of u_eps.
  const Mesh m = build_mesh(64, 16, 0.8);
  const Domain d = wavy(0.125, 2.0);
  const auto s = solve_navier(m, d, sine_data(), FormKind::LaplacianEnergy);
  const auto z = solve_navier(m, Domain::reference(), DataField::zero(), FormKind::LaplacianEnergy);
  const auto n = zero_extension_distance(s, z);
  // Compare with the pulled-back quadrature of the assembly module.
  EXPECT_NEAR(n.l2, e_distance(s.u, FeFunction::zero(m), d, Norm::L2), 1e-6 * n.l2);
  const double h1 = e_distance(s.u, FeFunction::zero(m), d, Norm::H1);
  EXPECT_NEAR(n.h1(), h1, 1e-6 * h1);
}

TEST(GammaNormal, AnalyticTopFlux) {
  const Mesh m = build_mesh(16, 16);
  const auto s = solve_navier(m, Domain::reference(), analytic_data(), FormKind::LaplacianEnergy);
  // u_y(x, 0) = sin(pi x) sinh(pi).
  EXPECT_NEAR(gamma_normal_norm(s) / (std::sinh(kPi) * std::sqrt(0.5)), 1.0, 1e-5);
}

TEST(GammaNormal, StrangeTermDampsTheFlux) {
  const Mesh m = build_mesh(8, 8);
  double previous = std::numeric_limits<double>::infinity();
  for (double gamma : {0.0, 10.0, 100.0}) {
    const double flux = gamma_normal_norm(solve_navier_strange(m, sine_data(), gamma));
    EXPECT_LT(flux, previous);
    previous = flux;
  }
  EXPECT_THROW(solve_navier_strange(m, sine_data(), -1.0), ArgumentError);
}
