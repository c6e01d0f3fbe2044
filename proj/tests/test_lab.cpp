#include "steklov/lab.hpp"
#include "steklov/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace steklov;
using namespace steklov::lab;

namespace {

// Small sweep that runs in seconds: two periods of eight elements.
ExperimentConfig tiny(const std::string& experiment) {
  ExperimentConfig c = default_config(experiment);
  c.epsilons = {0.25, 0.125};
  c.ny = 6;
  c.grading = 0.8;
  c.k = 1;
  return c;
}

ReportRow row(double alpha, double eps, int n, double value, double reference) {
  return {alpha, eps, static_cast<int>(8 / eps), 32, n, value, reference, std::abs(value - reference),
          Verdict::Reported};
}

Table single_series(std::vector<double> values, double reference, Rule rule) {
  Table t;
  t.name = "t";
  double eps = 0.125;
  for (double v : values) {
    t.rows.push_back(row(2.0, eps, 1, v, reference));
    eps /= 2;
  }
  t.checks.push_back({"c", 2.0, 1, rule, Verdict::Reported});
  recompute_verdicts(t);
  return t;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("steklov_lab_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, ParsesKeysListsAndFractions) {
  const auto c = parse_config(
      "# sweep\n"
      "experiment = trichotomy\n"
      "coefficients = 1, 0.5 , 0.25\n"
      "alpha = 2, 3/2\n"
      "eps = 1/8, 1/16   # trailing comment\n"
      "\n"
      "ny = 16\n"
      "grading = 0.75\n"
      "k = 3\n"
      "out = some/dir\n");
  EXPECT_EQ(c.experiment, "trichotomy");
  EXPECT_EQ(c.coefficients, (std::vector<double>{1.0, 0.5, 0.25}));
  EXPECT_EQ(c.alphas, (std::vector<double>{2.0, 1.5}));
  EXPECT_EQ(c.epsilons, (std::vector<double>{0.125, 0.0625}));
  EXPECT_EQ(c.ny, 16);
  EXPECT_EQ(c.k, 3);
  EXPECT_DOUBLE_EQ(c.grading, 0.75);
  EXPECT_EQ(c.out_dir, "some/dir");
  EXPECT_EQ(c.nx(0.0625), 128);
}

TEST(Config, DefaultsFollowTheExperiment) {
  EXPECT_EQ(parse_config("", "degeneration").alphas, (std::vector<double>{1.0}));
  EXPECT_EQ(parse_config("", "dbs_convergence").alphas, (std::vector<double>{2.0}));
  const auto t = parse_config("");
  EXPECT_EQ(t.experiment, "trichotomy");
  EXPECT_EQ(t.alphas, (std::vector<double>{2.0, 1.5, 1.2}));
  EXPECT_EQ(t.epsilons, (std::vector<double>{0.125, 0.0625, 0.03125}));
  EXPECT_EQ(t.ny, 32);
  EXPECT_DOUBLE_EQ(t.grading, 0.7);
}

TEST(Config, RejectsMalformedInput) {
  const char* bad[] = {
      "ny 32",                        // no '='
      "ny =",                         // empty value
      "colour = red",                 // unknown key
      "ny = 4\nny = 8",               // duplicate
      "ny = 3.5",                     // not an integer
      "grading = fast",               // not a number
      "eps = 1/0",                    // zero denominator
      "eps = 1/16, 1/8",              // increasing
      "eps = 1/8, 1/8",               // not strictly decreasing
      "eps = 0.3",                    // 1/eps not an integer
      "eps = 1",                      // above 1/2
      "elements_per_period = 4",      // mesh rule
      "experiment = sweep",           // unknown experiment
      "alpha = ",                     // empty list
      "k = 0",
      "grading = 1.5",
      "samples = 1, 2",               // too few samples
      "k_hat = 5",
  };
  for (const char* text : bad) EXPECT_THROW(parse_config(text), ConfigError) << text;
  EXPECT_THROW(parse_config("alpha = 1.5", "degeneration"), ConfigError);
  EXPECT_THROW(parse_config("experiment = degeneration", "trichotomy"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/steklov.cfg"), ConfigError);
}

TEST(Verdicts, RulesOnOneSeries) {
  Rule decreasing;
  decreasing.trend = Trend::Decreasing;
  decreasing.max_relative_gap = 0.02;
  EXPECT_EQ(single_series({10.5, 10.2, 10.1}, 10.0, decreasing).checks[0].verdict, Verdict::Satisfied);
  EXPECT_EQ(single_series({10.5, 10.2, 10.3}, 10.0, decreasing).checks[0].verdict, Verdict::Violated);
  // Decreasing but final gap 3 %.
  const Table far = single_series({10.9, 10.5, 10.3}, 10.0, decreasing);
  EXPECT_EQ(far.checks[0].verdict, Verdict::Violated);
  EXPECT_EQ(far.rows[1].verdict, Verdict::Satisfied);
  EXPECT_EQ(far.rows[2].verdict, Verdict::Violated);

  Rule halving;
  halving.max_ratio = 0.5;
  EXPECT_EQ(single_series({4.0, 3.0, 2.0}, 0.0, halving).checks[0].verdict, Verdict::Satisfied);
  EXPECT_EQ(single_series({4.0, 3.0, 2.1}, 0.0, halving).checks[0].verdict, Verdict::Violated);
  // 0 <= 0.5 * 0: a vanishing series passes the ratio test.
  EXPECT_EQ(single_series({0.0, 0.0, 0.0}, 0.0, halving).checks[0].verdict, Verdict::Satisfied);

  Rule growth;
  growth.measure = Measure::Value;
  growth.min_ratio = 2.0;
  EXPECT_EQ(single_series({30.0, 50.0, 60.0}, 8.0, growth).checks[0].verdict, Verdict::Satisfied);
  EXPECT_EQ(single_series({30.0, 50.0, 59.0}, 8.0, growth).checks[0].verdict, Verdict::Violated);

  Rule bound;
  bound.max_gap = 0.05;
  EXPECT_EQ(single_series({0.2, 0.04}, 0.0, bound).checks[0].verdict, Verdict::Satisfied);

  Rule non_increasing;
  non_increasing.trend = Trend::NonIncreasing;
  EXPECT_EQ(single_series({1.0, 1.0, 0.5}, 0.0, non_increasing).checks[0].verdict, Verdict::Satisfied);
  EXPECT_EQ(single_series({1.0, 1.0, 0.5}, 0.0, decreasing).checks[0].verdict, Verdict::Violated);

  EXPECT_EQ(single_series({NAN, 1.0}, 0.0, non_increasing).checks[0].verdict, Verdict::Violated);
}

TEST(Verdicts, UncheckedRowsAreReportedAndEmptySeriesFail) {
  Table t = single_series({1.0, 0.4}, 0.0, [] {
    Rule r;
    r.max_ratio = 0.5;
    return r;
  }());
  t.rows.push_back(row(2.0, 0.125, 2, 7.0, 0.0));
  t.checks.push_back({"missing", 1.5, 1, Rule{}, Verdict::Reported});
  recompute_verdicts(t);
  EXPECT_EQ(t.rows.back().verdict, Verdict::Reported);
  EXPECT_EQ(t.checks[0].verdict, Verdict::Satisfied);
  EXPECT_EQ(t.checks[1].verdict, Verdict::Violated);
  ExperimentReport r{"x", {t}, {}};
  EXPECT_FALSE(r.all_satisfied());
  r.tables[0].checks.pop_back();
  EXPECT_TRUE(r.all_satisfied());
  EXPECT_FALSE(ExperimentReport{}.all_satisfied());
}

TEST(Csv, EmptyTableIsHeaderOnly) {
  Table t;
  EXPECT_EQ(to_csv(t), "alpha,eps,nx,ny,n,value,reference,gap,verdict\n");
  EXPECT_TRUE(parse_csv(to_csv(t)).empty());
}

TEST(Csv, OneRowRoundTrips) {
  Table t;
  t.rows.push_back({1.5, 0.03125, 256, 32, 1, 0.1 + 0.2, 194.3391945, 1e-300, Verdict::Violated});
  const std::string csv = to_csv(t);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  const auto back = parse_csv(csv);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], t.rows[0]);
}

TEST(Csv, RandomRowsRoundTripBitwise) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  Table t;
  for (int i = 0; i < 200; ++i) {
    const auto r = [&] { return std::ldexp(unit(rng), expo(rng) / 10); };
    t.rows.push_back({r(), std::abs(r()), i, i % 7, i % 3 + 1, r(), r(), std::abs(r()),
                      static_cast<Verdict>(i % 3)});
  }
  EXPECT_EQ(parse_csv(to_csv(t)), t.rows);
}

TEST(Csv, RejectsMalformedText) {
  EXPECT_THROW(parse_csv(""), ConfigError);
  EXPECT_THROW(parse_csv("a,b\n"), ConfigError);
  EXPECT_THROW(parse_csv("alpha,eps,nx,ny,n,value,reference,gap,verdict\n1,2,3\n"), ConfigError);
  EXPECT_THROW(parse_csv("alpha,eps,nx,ny,n,value,reference,gap,verdict\n1,2,x,4,5,6,7,8,Satisfied\n"), ConfigError);
  EXPECT_THROW(parse_csv("alpha,eps,nx,ny,n,value,reference,gap,verdict\n1,2,3,4,5,6,7,8,Maybe\n"), ConfigError);
}

TEST(Svg, DeterministicAndWellFormed) {
  Table t = single_series({3.0, 2.0, 1.5}, 1.0, Rule{});
  t.rows.push_back(row(1.5, 0.125, 1, 5.0, 4.0));
  const std::string a = to_svg(t);
  EXPECT_EQ(a, to_svg(t));
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_NE(a.find("</svg>"), std::string::npos);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n') > 10, true);
  EXPECT_NE(a.find("alpha=1.5 n=1"), std::string::npos);
  EXPECT_NE(a.find("1/32"), std::string::npos);
  EXPECT_NE(to_svg(Table{}).find("</svg>"), std::string::npos);
}

TEST(Emit, WritesFilesAndReportsIoErrors) {
  const auto dir = scratch_dir("emit");
  ExperimentReport r{"demo", {single_series({2.0, 1.0}, 0.0, Rule{})}, {"note"}};
  const auto files = emit(r, dir);
  ASSERT_EQ(files.size(), 3u);
  for (const auto& f : files) EXPECT_TRUE(std::filesystem::exists(f)) << f;
  std::ifstream csv(dir / "demo_t.csv");
  std::stringstream text;
  text << csv.rdbuf();
  EXPECT_EQ(parse_csv(text.str()), r.tables[0].rows);

  // A regular file where the directory should be.
  const auto blocker = scratch_dir("emit_blocker");
  std::ofstream(blocker) << "x";
  EXPECT_THROW(emit(r, blocker / "sub"), IoError);
  std::filesystem::remove(blocker);
  std::filesystem::remove_all(dir);
}

TEST(Runners, TrichotomyIsDeterministicAcrossThreadCounts) {
  ExperimentConfig c = tiny("trichotomy");
  c.k = 2;
  const auto one = run_trichotomy(c, 1);
  const auto two = run_trichotomy(c, 3);
  ASSERT_EQ(one.tables.size(), 1u);
  EXPECT_EQ(one.tables[0].rows.size(), 3u * 2u * 2u);
  EXPECT_EQ(to_csv(one.tables[0]), to_csv(two.tables[0]));
  EXPECT_EQ(summary_text(one), summary_text(two));
  EXPECT_EQ(to_csv(one.tables[0]), to_csv(run_trichotomy(c, 1).tables[0]));
}

TEST(Runners, VerdictsAreRecomputableFromTheCsv) {
  const auto report = run_trichotomy(tiny("trichotomy"));
  const Table& t = report.tables[0];
  Table copy = t;
  copy.rows = parse_csv(to_csv(t));
  for (auto& r : copy.rows) r.verdict = Verdict::Reported;
  for (auto& ch : copy.checks) ch.verdict = Verdict::Reported;
  recompute_verdicts(copy);
  EXPECT_EQ(copy.rows, t.rows);
  for (std::size_t i = 0; i < t.checks.size(); ++i) EXPECT_EQ(copy.checks[i].verdict, t.checks[i].verdict);
  // Gap column is |value - reference|.
  for (const auto& r : t.rows) EXPECT_DOUBLE_EQ(r.gap, std::abs(r.value - r.reference));
}

TEST(Runners, TrichotomyReferenceCarriesGammaAtTheCriticalExponent) {
  ExperimentConfig c = tiny("trichotomy");
  c.alphas = {2.0, 1.5};
  c.epsilons = {0.25};
  const auto t = run_trichotomy(c).tables[0];
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_NEAR(t.rows[1].reference - t.rows[0].reference, 6.0 * std::pow(std::numbers::pi, 3), 1e-9);
}

TEST(Runners, UnperturbedDbsSweepHasNoGap) {
  ExperimentConfig c = tiny("dbs_convergence");
  c.coefficients = {0.0};
  c.epsilons = {0.125, 0.0625};  // kappa layer inside the rectangle
  const auto report = run_dbs_convergence(c);
  for (const Table& t : report.tables) {
    for (const auto& r : t.rows) EXPECT_LE(r.gap, 1e-8 * std::max(1.0, std::abs(r.reference))) << t.name;
  }
}

TEST(Runners, DbsSweepRefusesWhenTheAssumptionFails) {
  ExperimentConfig c = tiny("dbs_convergence");
  c.alphas = {1.5};
  c.epsilons = {0.25, 0.125, 0.0625};
  try {
    run_dbs_convergence(c);
    FAIL() << "expected AssumptionRefused";
  } catch (const AssumptionRefused& e) {
    EXPECT_FALSE(e.report().satisfied());
    EXPECT_EQ(e.report().rows.size(), 3u);
  }
}

TEST(Runners, DegenerationWithoutOscillationKeepsALargeGap) {
  ExperimentConfig c = tiny("degeneration");
  c.coefficients = {0.0};
  const auto report = run_degeneration(c);
  const Table& t = report.tables[0];
  for (const auto& r : t.rows) EXPECT_GT(r.gap, 0.1 * r.reference);
  EXPECT_EQ(t.checks[0].verdict, Verdict::Violated);
  EXPECT_FALSE(report.all_satisfied());
}

TEST(Runners, ClampedReferenceExceedsUnclamped) {
  const Mesh m = build_mesh(8, 6, 0.8);
  const auto delta = [&m](EssentialBc bc) {
    const DofMap d = make_dofmap(m, bc);
    return solve_steklov(assemble({FormKind::HessianEnergy}, m, d, Domain::reference()),
                         assemble({FormKind::NormalTrace, BoundaryPart::All}, m, d, Domain::reference()), 2)
        .eigenvalues;
  };
  const auto clamped = delta(EssentialBc::clamp_on_gamma());
  const auto free = delta(EssentialBc::dirichlet_all());
  for (int i = 0; i < 2; ++i) EXPECT_GT(clamped[i], free[i]);
}

TEST(Runners, NavierSweepWithZeroDataHasZeroNorms) {
  ExperimentConfig c = tiny("navier_stability");
  c.data_scale = 0.0;
  const auto report = run_navier_stability(c);
  ASSERT_EQ(report.tables.size(), 2u);
  for (const Table& t : report.tables) {
    for (const auto& r : t.rows) EXPECT_EQ(r.value, 0.0) << t.name;
  }
}

TEST(Runners, DispatchAndValidation) {
  ExperimentConfig c = tiny("trichotomy");
  c.experiment = "nothing";
  EXPECT_THROW(run_experiment(c), ConfigError);
  c = tiny("trichotomy");
  c.elements_per_period = 6;
  EXPECT_THROW(run_trichotomy(c), ConfigError);
}
