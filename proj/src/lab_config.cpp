#include "steklov/lab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace steklov::lab {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
  std::ostringstream msg;
  msg << "config line " << line << ": " << what;
  throw ConfigError(msg.str());
}

// A number, or a fraction p/q such as 1/32.
double parse_number(std::string_view s, int line) {
  s = trim(s);
  const auto slash = s.find('/');
  if (slash != std::string_view::npos) {
    const double num = parse_number(s.substr(0, slash), line);
    const double den = parse_number(s.substr(slash + 1), line);
    if (den == 0.0) fail(line, "zero denominator in '" + std::string(s) + "'");
    return num / den;
  }
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    fail(line, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

int parse_int(std::string_view s, int line) {
  const double v = parse_number(s, line);
  if (v != std::floor(v) || std::abs(v) > 1e9) fail(line, "not an integer: '" + std::string(trim(s)) + "'");
  return static_cast<int>(v);
}

std::vector<double> parse_list(std::string_view s, int line) {
  std::vector<double> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_number(s.substr(0, comma), line));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

bool known_experiment(const std::string& name) {
  return std::find(std::begin(kExperiments), std::end(kExperiments), name) != std::end(kExperiments);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

BoundaryProfile ExperimentConfig::profile(double alpha) const {
  return samples.empty() ? BoundaryProfile::fourier_cosine(coefficients, alpha) : BoundaryProfile::sampled(samples, alpha);
}

int ExperimentConfig::nx(double eps) const { return static_cast<int>(std::lround(elements_per_period / eps)); }

void ExperimentConfig::validate() const {
  require(known_experiment(experiment), "unknown experiment '" + experiment + "'");
  require(!alphas.empty(), "alpha list is empty");
  for (double a : alphas) require(a > 0.0, "alpha must be positive");
  if (experiment == "degeneration") {
    for (double a : alphas) require(a >= 1.0 && a < 1.5, "degeneration sweep needs alpha in [1, 3/2)");
  }
  require(!epsilons.empty(), "eps list is empty");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    const double e = epsilons[i];
    require(e > 0.0 && e <= 0.5, "eps must lie in (0, 1/2]");
    require(std::abs(1.0 / e - std::round(1.0 / e)) < 1e-9, "1/eps must be an integer (whole periods on W)");
    if (i > 0) require(e < epsilons[i - 1], "eps list must be strictly decreasing");
  }
  require(elements_per_period >= 8, "mesh rule: at least 8 elements per period eps");
  require(ny >= 2, "ny must be at least 2");
  require(grading > 0.0 && grading <= 1.0, "grading must lie in (0, 1]");
  require(k >= 1, "k must be at least 1");
  require(tol > 0.0, "tol must be positive");
  require(max_iterations >= 1, "max_iterations must be at least 1");
  require(layer_factor > 0.0, "layer_factor must be positive");
  require(k_hat > 6.0, "k_hat must exceed 6");
  require(cell_modes >= 1, "cell_modes must be at least 1");
  require(samples.empty() ? !coefficients.empty() : samples.size() >= 4,
          "profile needs coefficients or at least 4 samples");
  require(!out_dir.empty(), "out must not be empty");
  try {
    (void)profile(alphas.front());
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid profile: ") + e.what());
  }
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  if (experiment == "trichotomy") {
    c.alphas = {2.0, 1.5, 1.2};
  } else if (experiment == "dbs_convergence") {
    c.alphas = {2.0};
  } else if (experiment == "degeneration") {
    c.alphas = {1.0};
  } else if (experiment == "navier_stability") {
    c.alphas = {2.0, 1.5, 1.2};
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

ExperimentConfig parse_config(std::string_view text, const std::string& fallback_experiment) {
  struct Entry {
    int line;
    std::string value;
  };
  std::map<std::string, Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty()) fail(line_no, "expected 'key = value'");
    if (!entries.emplace(key, Entry{line_no, value}).second) fail(line_no, "duplicate key '" + key + "'");
  }

  std::string experiment = fallback_experiment.empty() ? "trichotomy" : fallback_experiment;
  if (const auto it = entries.find("experiment"); it != entries.end()) {
    if (!fallback_experiment.empty() && it->second.value != fallback_experiment) {
      fail(it->second.line, "config is for '" + it->second.value + "', not '" + fallback_experiment + "'");
    }
    experiment = it->second.value;
  }
  if (!known_experiment(experiment)) throw ConfigError("unknown experiment '" + experiment + "'");
  ExperimentConfig c = default_config(experiment);

  for (const auto& [key, entry] : entries) {
    const int l = entry.line;
    const std::string_view v = entry.value;
    if (key == "experiment") continue;
    if (key == "coefficients") c.coefficients = parse_list(v, l);
    else if (key == "samples") c.samples = parse_list(v, l);
    else if (key == "alpha") c.alphas = parse_list(v, l);
    else if (key == "eps") c.epsilons = parse_list(v, l);
    else if (key == "elements_per_period") c.elements_per_period = parse_int(v, l);
    else if (key == "ny") c.ny = parse_int(v, l);
    else if (key == "grading") c.grading = parse_number(v, l);
    else if (key == "k") c.k = parse_int(v, l);
    else if (key == "tol") c.tol = parse_number(v, l);
    else if (key == "max_iterations") c.max_iterations = parse_int(v, l);
    else if (key == "layer_factor") c.layer_factor = parse_number(v, l);
    else if (key == "k_hat") c.k_hat = parse_number(v, l);
    else if (key == "cell_modes") c.cell_modes = parse_int(v, l);
    else if (key == "data_scale") c.data_scale = parse_number(v, l);
    else if (key == "out") c.out_dir = std::string(v);
    else fail(l, "unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::string& fallback_experiment) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), fallback_experiment);
}

}  // namespace steklov::lab
