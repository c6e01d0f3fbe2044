#include "steklov/cell_problem.hpp"
#include "steklov/lab.hpp"
#include "steklov/navier.hpp"
#include "steklov/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <thread>

namespace steklov::lab {

namespace {

bool critical(double alpha) { return std::abs(alpha - 1.5) < 1e-12; }

std::string format(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Runs the tasks on up to `threads` workers; results keep task order.
template <class T>
std::vector<T> run_ordered(const std::vector<std::function<T()>>& tasks, int threads) {
  std::vector<T> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = tasks[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

DomainSpec make_spec(const ExperimentConfig& c, double alpha, double eps) {
  DomainSpec spec;
  spec.epsilon = eps;
  spec.profile = c.profile(alpha);
  spec.validate();
  return spec;
}

Mesh make_mesh(const ExperimentConfig& c, double eps) { return build_mesh(c.nx(eps), c.ny, c.grading); }

Domain flat_domain(const ExperimentConfig& c, const DomainSpec& spec) {
  const double depth = std::clamp(c.layer_factor * spec.g_sup(0), spec.epsilon, 0.8);
  return Domain::pulled_back(build_diffeo(spec, FlatLayer{depth}));
}

void require_resolved(const Mesh& mesh, const DomainSpec& spec) {
  if (!resolves_oscillation(mesh, spec)) {
    throw ConfigError("mesh rule violated: fewer than 8 elements per period at eps = " +
                      format("%g", spec.epsilon));
  }
}

SteklovOptions solver_options(const ExperimentConfig& c) {
  SteklovOptions o;
  o.tol = c.tol;
  o.max_iterations = c.max_iterations;
  return o;
}

std::vector<double> eigenvalues(const Mesh& mesh, const DofMap& dofs, const Domain& domain, FormKind energy,
                                BoundaryPart part, const ExperimentConfig& c) {
  const auto s = solve_steklov(assemble({energy}, mesh, dofs, domain),
                               assemble({FormKind::NormalTrace, part}, mesh, dofs, domain), c.k, solver_options(c));
  std::vector<double> out = s.eigenvalues;
  out.resize(c.k, std::numeric_limits<double>::quiet_NaN());
  return out;
}

ReportRow make_row(double alpha, double eps, const ExperimentConfig& c, int n, double value, double reference) {
  return {alpha, eps, c.nx(eps), c.ny, n, value, reference, std::abs(value - reference), Verdict::Reported};
}

DataField navier_data(double scale) {
  return {[scale](const Vec2& p) { return scale * (1.0 + p.x()) * std::exp(p.y()); },
          [scale](const Vec2& p) { return Vec2(scale * std::exp(p.y()), scale * (1.0 + p.x()) * std::exp(p.y())); }};
}

double relative_h1(const ExtensionNorms& n) { return n.limit_h1 > 0.0 ? n.h1() / n.limit_h1 : n.h1(); }

ExperimentReport finish(ExperimentReport report) {
  for (Table& t : report.tables) recompute_verdicts(t);
  return report;
}

// Per-eps reference values shared by every alpha, then one task per (alpha, eps).
struct Sweep {
  std::vector<std::vector<double>> references;          // [eps][n]
  std::vector<std::vector<std::vector<double>>> cells;  // [alpha][eps][quantity]
};

Sweep sweep(const ExperimentConfig& c, int threads, const std::function<std::vector<double>(double)>& reference,
            const std::function<std::vector<double>(double, double)>& cell) {
  std::vector<std::function<std::vector<double>()>> tasks;
  for (double eps : c.epsilons) tasks.push_back([&reference, eps] { return reference(eps); });
  for (double alpha : c.alphas) {
    for (double eps : c.epsilons) tasks.push_back([&cell, alpha, eps] { return cell(alpha, eps); });
  }
  const auto results = run_ordered(tasks, threads);
  Sweep s;
  const std::size_t ne = c.epsilons.size();
  s.references.assign(results.begin(), results.begin() + ne);
  for (std::size_t a = 0; a < c.alphas.size(); ++a) {
    s.cells.emplace_back(results.begin() + ne * (a + 1), results.begin() + ne * (a + 2));
  }
  return s;
}

}  // namespace

ExperimentReport run_trichotomy(const ExperimentConfig& c, int threads) {
  c.validate();
  const double gamma = solve_cell(c.profile(1.5), c.cell_modes).gamma;
  const auto reference = [&c](double eps) {
    const Mesh mesh = make_mesh(c, eps);
    return eigenvalues(mesh, make_dofmap(mesh, EssentialBc::clamp_on_sigma()), Domain::reference(),
                       FormKind::HessianEnergy, BoundaryPart::Gamma, c);
  };
  const auto cell = [&c](double alpha, double eps) {
    const DomainSpec spec = make_spec(c, alpha, eps);
    const Mesh mesh = make_mesh(c, eps);
    require_resolved(mesh, spec);
    return eigenvalues(mesh, make_dofmap(mesh, EssentialBc::clamp_on_sigma()), flat_domain(c, spec),
                       FormKind::HessianEnergy, BoundaryPart::Gamma, c);
  };
  const Sweep s = sweep(c, threads, reference, cell);

  ExperimentReport report;
  report.experiment = "trichotomy";
  Table t;
  t.name = "lambda";
  t.quantity = "value = lambda_n(eps) (Hessian energy, clamped on Sigma, Steklov on Gamma); reference = "
               "lambda_n(0) + gamma for alpha = 3/2, lambda_n(0) otherwise";
  for (std::size_t a = 0; a < c.alphas.size(); ++a) {
    const double alpha = c.alphas[a];
    for (std::size_t e = 0; e < c.epsilons.size(); ++e) {
      for (int n = 1; n <= c.k; ++n) {
        const double ref = s.references[e][n - 1] + (critical(alpha) ? gamma : 0.0);
        t.rows.push_back(make_row(alpha, c.epsilons[e], c, n, s.cells[a][e][n - 1], ref));
      }
    }
    Rule rule;
    std::string name;
    if (alpha > 1.5 && !critical(alpha)) {
      name = "stable regime";
      rule.trend = Trend::Decreasing;
      rule.max_relative_gap = 0.02;
    } else if (critical(alpha)) {
      name = "strange-term shift";
      rule.max_ratio = 0.5;
    } else {
      name = "divergence";
      rule.measure = Measure::Value;
      rule.min_ratio = 2.0;
    }
    t.checks.push_back({name, alpha, 1, rule, Verdict::Reported});
  }
  report.tables.push_back(std::move(t));
  report.notes.push_back(format("gamma = %.10g (cell problem, %g modes)", gamma, c.cell_modes));
  for (std::size_t e = 0; e < c.epsilons.size(); ++e) {
    report.notes.push_back(format("eps = %g: lambda_1(0) = %.10g", c.epsilons[e], s.references[e][0]));
  }
  return finish(std::move(report));
}

ExperimentReport run_dbs_convergence(const ExperimentConfig& c, int threads) {
  c.validate();
  for (double alpha : c.alphas) {
    const AssumptionReport check = check_assumptions(c.profile(alpha), c.epsilons, default_kappa_rule(alpha));
    if (!check.satisfied()) {
      throw AssumptionRefused(format("sharp assumption violated for alpha = %g; DBS sweep refused", alpha), check);
    }
  }
  // Per cell and n: d_n, delta_n, the H^2 E-distance of Laplacian mode n, d_n(0), delta_n(0).
  struct Pencils {
    SteklovSpectrum laplacian;
    SteklovSpectrum hessian;
  };
  const auto solve = [&c](const Mesh& mesh, const DofMap& dofs, const Domain& domain) {
    const auto b = assemble({FormKind::NormalTrace, BoundaryPart::All}, mesh, dofs, domain);
    return Pencils{solve_steklov(assemble({FormKind::LaplacianEnergy}, mesh, dofs, domain), b, c.k, solver_options(c)),
                   solve_steklov(assemble({FormKind::HessianEnergy}, mesh, dofs, domain), b, c.k, solver_options(c))};
  };
  const auto pad = [&c](std::vector<double> v) {
    v.resize(c.k, std::numeric_limits<double>::quiet_NaN());
    return v;
  };
  const auto reference = [](double) { return std::vector<double>{}; };
  const auto cell = [&](double alpha, double eps) {
    const DomainSpec spec = make_spec(c, alpha, eps);
    const Mesh mesh = make_mesh(c, eps);
    require_resolved(mesh, spec);
    const DofMap dofs = make_dofmap(mesh, EssentialBc::dirichlet_all());
    const Domain domain = Domain::pulled_back(build_diffeo(spec, KappaLayer{default_kappa_rule(alpha)(eps), c.k_hat}));
    const Pencils p = solve(mesh, dofs, domain);
    const Pencils p0 = solve(mesh, dofs, Domain::reference());
    std::vector<double> out = pad(p.laplacian.eigenvalues);
    const auto h = pad(p.hessian.eigenvalues);
    out.insert(out.end(), h.begin(), h.end());
    for (int n = 0; n < c.k; ++n) {
      if (n >= p.laplacian.size() || n >= p0.laplacian.size()) {
        out.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      const FeFunction u_hat = FeFunction::from_free(mesh, dofs, p.laplacian.modes.col(n));
      const FeFunction u = FeFunction::from_free(mesh, dofs, p0.laplacian.modes.col(n));
      // Modes are defined up to sign.
      out.push_back(std::min(e_distance(u_hat, u, domain, Norm::H2), e_distance(u_hat * -1.0, u, domain, Norm::H2)));
    }
    const auto l0 = pad(p0.laplacian.eigenvalues);
    const auto h0 = pad(p0.hessian.eigenvalues);
    out.insert(out.end(), l0.begin(), l0.end());
    out.insert(out.end(), h0.begin(), h0.end());
    return out;
  };
  const Sweep s = sweep(c, threads, reference, cell);

  ExperimentReport report;
  report.experiment = "dbs_convergence";
  Table lap{"laplacian", "value = d_n(eps) (Laplacian energy, Steklov on the whole boundary); reference = d_n(0)", {}, {}};
  Table hes{"hessian", "value = delta_n(eps) (Hessian energy, Steklov on the whole boundary); reference = delta_n(0)", {}, {}};
  Table dist{"e_distance", "value = H^2 E-distance of Laplacian mode n to its unperturbed counterpart; reference = 0", {}, {}};
  for (std::size_t a = 0; a < c.alphas.size(); ++a) {
    const double alpha = c.alphas[a];
    for (std::size_t e = 0; e < c.epsilons.size(); ++e) {
      const auto& v = s.cells[a][e];
      const int k = c.k;
      for (int n = 1; n <= k; ++n) {
        lap.rows.push_back(make_row(alpha, c.epsilons[e], c, n, v[n - 1], v[3 * k + n - 1]));
        hes.rows.push_back(make_row(alpha, c.epsilons[e], c, n, v[k + n - 1], v[4 * k + n - 1]));
        dist.rows.push_back(make_row(alpha, c.epsilons[e], c, n, v[2 * k + n - 1], 0.0));
      }
    }
    Rule gap;
    gap.max_relative_gap = 0.02;
    lap.checks.push_back({"continuity of d_1", alpha, 1, gap, Verdict::Reported});
    hes.checks.push_back({"continuity of delta_1", alpha, 1, gap, Verdict::Reported});
    Rule halving;
    halving.max_ratio = 0.5;
    dist.checks.push_back({"eigenfunction convergence", alpha, 1, halving, Verdict::Reported});
  }
  report.tables = {std::move(lap), std::move(hes), std::move(dist)};
  for (double alpha : c.alphas) {
    const KappaRule rule = default_kappa_rule(alpha);
    for (double eps : c.epsilons) {
      report.notes.push_back(format("alpha = %g, eps = %g: kappa = %.6g", alpha, eps, rule(eps)));
    }
  }
  return finish(std::move(report));
}

ExperimentReport run_degeneration(const ExperimentConfig& c, int threads) {
  c.validate();
  // Clamped-Gamma reference, then the unclamped one for the notes.
  const auto reference = [&c](double eps) {
    const Mesh mesh = make_mesh(c, eps);
    std::vector<double> out = eigenvalues(mesh, make_dofmap(mesh, EssentialBc::clamp_on_gamma()), Domain::reference(),
                                          FormKind::HessianEnergy, BoundaryPart::All, c);
    const auto free = eigenvalues(mesh, make_dofmap(mesh, EssentialBc::dirichlet_all()), Domain::reference(),
                                  FormKind::HessianEnergy, BoundaryPart::All, c);
    out.insert(out.end(), free.begin(), free.end());
    return out;
  };
  const auto cell = [&c](double alpha, double eps) {
    const DomainSpec spec = make_spec(c, alpha, eps);
    const Mesh mesh = make_mesh(c, eps);
    require_resolved(mesh, spec);
    return eigenvalues(mesh, make_dofmap(mesh, EssentialBc::dirichlet_all()), flat_domain(c, spec),
                       FormKind::HessianEnergy, BoundaryPart::All, c);
  };
  const Sweep s = sweep(c, threads, reference, cell);

  ExperimentReport report;
  report.experiment = "degeneration";
  Table t{"delta",
          "value = delta_n(eps) (Hessian energy, Dirichlet on the boundary, Steklov on the whole boundary); "
          "reference = delta_n(0) with u_nu = 0 on Gamma",
          {},
          {}};
  for (std::size_t a = 0; a < c.alphas.size(); ++a) {
    for (std::size_t e = 0; e < c.epsilons.size(); ++e) {
      for (int n = 1; n <= c.k; ++n) {
        t.rows.push_back(make_row(c.alphas[a], c.epsilons[e], c, n, s.cells[a][e][n - 1], s.references[e][n - 1]));
      }
    }
    Rule rule;
    rule.trend = Trend::Decreasing;
    rule.max_relative_gap = 0.05;
    t.checks.push_back({"degeneration to clamped Gamma", c.alphas[a], 1, rule, Verdict::Reported});
  }
  report.tables.push_back(std::move(t));
  for (std::size_t e = 0; e < c.epsilons.size(); ++e) {
    report.notes.push_back(format("eps = %g: clamped delta_1(0) = %.10g, unclamped delta_1(0) = %.10g", c.epsilons[e],
                                  s.references[e][0], s.references[e][c.k]));
  }
  return finish(std::move(report));
}

ExperimentReport run_navier_stability(const ExperimentConfig& c, int threads) {
  c.validate();
  const double gamma = solve_cell(c.profile(1.5), c.cell_modes).gamma;
  const DataField f = navier_data(c.data_scale);
  const auto reference = [](double) { return std::vector<double>{}; };
  // Stable regime: three Navier norms then three modified-Navier norms. Critical: H^1
  // distances to the gamma-augmented and to the plain limit. Below: ||u_nu||_Gamma and
  // the H^1 distance to the clamped limit.
  const auto cell = [&](double alpha, double eps) -> std::vector<double> {
    const DomainSpec spec = make_spec(c, alpha, eps);
    const Mesh mesh = make_mesh(c, eps);
    require_resolved(mesh, spec);
    const Domain domain = flat_domain(c, spec);
    const Domain ref = Domain::reference();
    const auto modified = solve_navier(mesh, domain, f, FormKind::HessianEnergy);
    if (alpha > 1.5 && !critical(alpha)) {
      const auto nav = zero_extension_distance(solve_navier(mesh, domain, f, FormKind::LaplacianEnergy),
                                               solve_navier(mesh, ref, f, FormKind::LaplacianEnergy));
      const auto mod = zero_extension_distance(modified, solve_navier(mesh, ref, f, FormKind::HessianEnergy));
      return {nav.l2, nav.grad, nav.lap, mod.l2, mod.grad, mod.hess};
    }
    if (critical(alpha)) {
      return {relative_h1(zero_extension_distance(modified, solve_navier_strange(mesh, f, gamma))),
              relative_h1(zero_extension_distance(modified, solve_navier(mesh, ref, f, FormKind::HessianEnergy)))};
    }
    const auto clamped = solve_navier(mesh, ref, f, FormKind::HessianEnergy, EssentialBc::clamp_on_gamma());
    return {gamma_normal_norm(modified), relative_h1(zero_extension_distance(modified, clamped))};
  };
  const Sweep s = sweep(c, threads, reference, cell);

  ExperimentReport report;
  report.experiment = "navier_stability";
  Table nav{"navier",
            "Navier problem, value = ||D u_eps - D u_0|| over Omega_eps with u_0 extended by zero; n = 1: L^2, "
            "n = 2: gradient, n = 3: Laplacian; reference = 0",
            {},
            {}};
  Table mod{"modified",
            "modified Navier problem (Hessian energy). alpha > 3/2, n = 1, 2, 3: L^2, gradient, Hessian distance to "
            "u_0. alpha = 3/2, n = 1: relative H^1 distance to the gamma-augmented limit, n = 2: same to the plain "
            "limit. alpha < 3/2, n = 1: ||u_nu||_{L^2(Gamma_eps)}, n = 2: relative H^1 distance to the clamped limit. "
            "reference = 0",
            {},
            {}};
  for (std::size_t a = 0; a < c.alphas.size(); ++a) {
    const double alpha = c.alphas[a];
    for (std::size_t e = 0; e < c.epsilons.size(); ++e) {
      const auto& v = s.cells[a][e];
      const double eps = c.epsilons[e];
      if (v.size() == 6) {
        for (int n = 1; n <= 3; ++n) {
          nav.rows.push_back(make_row(alpha, eps, c, n, v[n - 1], 0.0));
          mod.rows.push_back(make_row(alpha, eps, c, n, v[n + 2], 0.0));
        }
      } else {
        for (int n = 1; n <= 2; ++n) mod.rows.push_back(make_row(alpha, eps, c, n, v[n - 1], 0.0));
      }
    }
    if (alpha > 1.5 && !critical(alpha)) {
      Rule halving;
      halving.trend = Trend::NonIncreasing;
      halving.max_ratio = 0.5;
      for (int n = 1; n <= 3; ++n) nav.checks.push_back({"Navier stability", alpha, n, halving, Verdict::Reported});
      Rule trend;
      trend.trend = Trend::NonIncreasing;
      for (int n = 1; n <= 3; ++n) mod.checks.push_back({"modified convergence", alpha, n, trend, Verdict::Reported});
    } else if (critical(alpha)) {
      Rule residual;
      residual.max_gap = 5e-2;
      mod.checks.push_back({"gamma-augmented limit", alpha, 1, residual, Verdict::Reported});
    } else {
      Rule decay;
      decay.measure = Measure::Value;
      decay.max_ratio = 1.0 / 3.0;
      mod.checks.push_back({"u_nu vanishes on Gamma", alpha, 1, decay, Verdict::Reported});
    }
  }
  if (!nav.rows.empty()) report.tables.push_back(std::move(nav));
  report.tables.push_back(std::move(mod));
  report.notes.push_back(format("data f = %g (1 + x) e^y; gamma = %.10g", c.data_scale, gamma));
  return finish(std::move(report));
}

ExperimentReport run_experiment(const ExperimentConfig& c, int threads) {
  if (c.experiment == "trichotomy") return run_trichotomy(c, threads);
  if (c.experiment == "dbs_convergence") return run_dbs_convergence(c, threads);
  if (c.experiment == "degeneration") return run_degeneration(c, threads);
  if (c.experiment == "navier_stability") return run_navier_stability(c, threads);
  throw ConfigError("unknown experiment '" + c.experiment + "'");
}

}  // namespace steklov::lab
