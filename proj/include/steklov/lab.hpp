#pragma once

// Experiment runners for the oscillating-boundary sweeps: configuration, report tables
// with recomputable verdicts, CSV / SVG / summary output.

#include "steklov/errors.hpp"
#include "steklov/profile_geometry.hpp"

#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace steklov::lab {

inline constexpr const char* kExperiments[] = {"trichotomy", "dbs_convergence", "degeneration",
                                               "navier_stability"};

struct ExperimentConfig {
  std::string experiment = "trichotomy";
  // b(y) = c_0 + sum_k c_k cos(2 pi k y); `samples` (periodic values on [0, 1)) wins when set.
  std::vector<double> coefficients{1.0, 1.0};
  std::vector<double> samples;
  std::vector<double> alphas{2.0, 1.5, 1.2};
  std::vector<double> epsilons{0.125, 0.0625, 0.03125};  // strictly decreasing
  int elements_per_period = 8;                           // nx = elements_per_period / eps
  int ny = 32;
  double grading = 0.7;
  int k = 1;  // eigenvalues per cell
  double tol = 1e-9;
  int max_iterations = 2000;
  // Flat layer depth clamp(layer_factor * ||g_eps||_inf, eps, 0.8); the DBS sweep uses
  // kappa layers of thickness k_hat * kappa_eps instead.
  double layer_factor = 4.0;
  double k_hat = 8.0;  // > 6
  int cell_modes = 16;
  double data_scale = 1.0;  // Navier data f = data_scale * (1 + x) e^y
  std::string out_dir = "steklov-out";

  BoundaryProfile profile(double alpha) const;
  int nx(double eps) const;
  /// Throws ConfigError.
  void validate() const;
};

/// Defaults of the named experiment (alpha list, eigenvalue count).
ExperimentConfig default_config(const std::string& experiment);
/// `key = value` lines, `#` comments, comma-separated lists. Unset keys keep the
/// defaults of the experiment named by `experiment` (or `fallback_experiment`).
ExperimentConfig parse_config(std::string_view text, const std::string& fallback_experiment = "");
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& fallback_experiment = "");

enum class Verdict { Satisfied, Violated, Reported };
const char* to_string(Verdict v);

struct ReportRow {
  double alpha = 0.0;
  double eps = 0.0;
  int nx = 0;
  int ny = 0;
  int n = 1;
  double value = 0.0;
  double reference = 0.0;
  double gap = 0.0;  // |value - reference|
  Verdict verdict = Verdict::Reported;

  bool operator==(const ReportRow&) const = default;
};

enum class Measure { Gap, Value };
enum class Trend { None, NonIncreasing, Decreasing };

/// Conditions on one series (rows with equal alpha and n, in eps order). Rows after
/// the first check the trend against their predecessor; the last row also checks the
/// final conditions. Unset thresholds are NaN.
struct Rule {
  Measure measure = Measure::Gap;
  Trend trend = Trend::None;
  double max_relative_gap = quiet_nan();  // gap <= t |reference|
  double max_gap = quiet_nan();           // gap <= t
  double max_ratio = quiet_nan();         // measure <= t * first measure
  double min_ratio = quiet_nan();         // measure >= t * first measure

  std::string describe() const;

  static double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }
};

struct Check {
  std::string name;
  double alpha = 0.0;
  int n = 1;
  Rule rule;
  Verdict verdict = Verdict::Reported;
};

struct Table {
  std::string name;
  std::string quantity;  // what value / reference mean
  std::vector<ReportRow> rows;
  std::vector<Check> checks;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<Table> tables;
  std::vector<std::string> notes;

  /// Every check Satisfied (and at least one check present).
  bool all_satisfied() const;
};

/// Sets row and check verdicts from the numeric columns and the rules. Rows outside
/// every check are Reported.
void recompute_verdicts(Table& table);

std::string to_csv(const Table& table);
/// Throws ConfigError on malformed input.
std::vector<ReportRow> parse_csv(std::string_view text);
std::string to_svg(const Table& table);
std::string summary_text(const ExperimentReport& report);

enum class Format { Csv, Svg };
/// Writes <experiment>_<table>.{csv,svg} and <experiment>_summary.txt; returns the
/// paths written. Throws IoError.
std::vector<std::filesystem::path> emit(const ExperimentReport& report, const std::filesystem::path& dir,
                                        const std::vector<Format>& formats = {Format::Csv, Format::Svg});

/// Thrown by the DBS sweep when the sharp assumption fails for the configured profile.
class AssumptionRefused : public Error {
 public:
  AssumptionRefused(const std::string& what, AssumptionReport report) : Error(what), report_(std::move(report)) {}
  const AssumptionReport& report() const { return report_; }

 private:
  AssumptionReport report_;
};

ExperimentReport run_trichotomy(const ExperimentConfig& config, int threads = 1);
ExperimentReport run_dbs_convergence(const ExperimentConfig& config, int threads = 1);
ExperimentReport run_degeneration(const ExperimentConfig& config, int threads = 1);
ExperimentReport run_navier_stability(const ExperimentConfig& config, int threads = 1);
/// Dispatches on config.experiment.
ExperimentReport run_experiment(const ExperimentConfig& config, int threads = 1);

}  // namespace steklov::lab
