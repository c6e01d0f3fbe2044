#include "steklov/lab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace steklov::lab {

namespace {

constexpr const char* kCsvHeader = "alpha,eps,nx,ny,n,value,reference,gap,verdict";

std::string shortest(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string fixed(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

double parse_double(std::string_view s, int line) {
  s = trim(s);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw ConfigError("csv line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

int parse_int(std::string_view s, int line) {
  s = trim(s);
  int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw ConfigError("csv line " + std::to_string(line) + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

Verdict parse_verdict(std::string_view s, int line) {
  s = trim(s);
  for (Verdict v : {Verdict::Satisfied, Verdict::Violated, Verdict::Reported}) {
    if (s == to_string(v)) return v;
  }
  throw ConfigError("csv line " + std::to_string(line) + ": bad verdict '" + std::string(s) + "'");
}

double measure(const ReportRow& r, Measure m) { return m == Measure::Gap ? r.gap : r.value; }

// x = 1/eps printed as a fraction when it is one.
std::string eps_label(double eps) {
  const double inv = 1.0 / eps;
  if (std::abs(inv - std::round(inv)) < 1e-9) return "1/" + std::to_string(static_cast<long>(std::lround(inv)));
  return fixed("%.3g", eps);
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied:
      return "Satisfied";
    case Verdict::Violated:
      return "Violated";
    case Verdict::Reported:
      break;
  }
  return "Reported";
}

std::string Rule::describe() const {
  const std::string m = measure == Measure::Gap ? "gap" : "value";
  std::vector<std::string> parts;
  if (trend == Trend::Decreasing) parts.push_back(m + " strictly decreasing along eps");
  if (trend == Trend::NonIncreasing) parts.push_back(m + " non-increasing along eps");
  if (!std::isnan(max_relative_gap)) parts.push_back("final gap <= " + fixed("%g", max_relative_gap) + " |reference|");
  if (!std::isnan(max_gap)) parts.push_back("final gap <= " + fixed("%g", max_gap));
  if (!std::isnan(max_ratio)) parts.push_back("final " + m + " <= " + fixed("%g", max_ratio) + " x first " + m);
  if (!std::isnan(min_ratio)) parts.push_back("final " + m + " >= " + fixed("%g", min_ratio) + " x first " + m);
  if (parts.empty()) return "no condition";
  std::string out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) out += "; " + parts[i];
  return out;
}

bool ExperimentReport::all_satisfied() const {
  bool any = false;
  for (const Table& t : tables) {
    for (const Check& c : t.checks) {
      if (c.verdict != Verdict::Satisfied) return false;
      any = true;
    }
  }
  return any;
}

void recompute_verdicts(Table& table) {
  for (ReportRow& r : table.rows) r.verdict = Verdict::Reported;
  for (Check& check : table.checks) {
    std::vector<std::size_t> series;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (table.rows[i].alpha == check.alpha && table.rows[i].n == check.n) series.push_back(i);
    }
    if (series.empty()) {
      check.verdict = Verdict::Violated;
      continue;
    }
    const Rule& rule = check.rule;
    const double first = measure(table.rows[series.front()], rule.measure);
    bool all = true;
    for (std::size_t j = 0; j < series.size(); ++j) {
      ReportRow& row = table.rows[series[j]];
      const double m = measure(row, rule.measure);
      bool ok = !std::isnan(m);
      if (j > 0) {
        const double prev = measure(table.rows[series[j - 1]], rule.measure);
        if (rule.trend == Trend::Decreasing) ok = ok && m < prev;
        if (rule.trend == Trend::NonIncreasing) ok = ok && m <= prev;
      }
      if (j + 1 == series.size()) {
        if (!std::isnan(rule.max_relative_gap)) ok = ok && row.gap <= rule.max_relative_gap * std::abs(row.reference);
        if (!std::isnan(rule.max_gap)) ok = ok && row.gap <= rule.max_gap;
        if (!std::isnan(rule.max_ratio)) ok = ok && m <= rule.max_ratio * first;
        if (!std::isnan(rule.min_ratio)) ok = ok && m >= rule.min_ratio * first;
      }
      if (!ok) {
        row.verdict = Verdict::Violated;
      } else if (row.verdict == Verdict::Reported) {
        row.verdict = Verdict::Satisfied;
      }
      all = all && ok;
    }
    check.verdict = all ? Verdict::Satisfied : Verdict::Violated;
  }
}

std::string to_csv(const Table& table) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const ReportRow& r : table.rows) {
    out += shortest(r.alpha) + ',' + shortest(r.eps) + ',' + std::to_string(r.nx) + ',' + std::to_string(r.ny) + ',' +
           std::to_string(r.n) + ',' + shortest(r.value) + ',' + shortest(r.reference) + ',' + shortest(r.gap) + ',' +
           to_string(r.verdict) + '\n';
  }
  return out;
}

std::vector<ReportRow> parse_csv(std::string_view text) {
  std::vector<ReportRow> rows;
  int line_no = 0;
  bool header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header) {
      if (line != kCsvHeader) throw ConfigError("csv: unexpected header '" + std::string(line) + "'");
      header = true;
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 9) throw ConfigError("csv line " + std::to_string(line_no) + ": expected 9 fields");
    rows.push_back({parse_double(f[0], line_no), parse_double(f[1], line_no), parse_int(f[2], line_no),
                    parse_int(f[3], line_no), parse_int(f[4], line_no), parse_double(f[5], line_no),
                    parse_double(f[6], line_no), parse_double(f[7], line_no), parse_verdict(f[8], line_no)});
  }
  if (!header) throw ConfigError("csv: missing header");
  return rows;
}

std::string to_svg(const Table& table) {
  constexpr double kWidth = 640.0, kHeight = 400.0;
  constexpr double kLeft = 80.0, kRight = 170.0, kTop = 40.0, kBottom = 50.0;
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  // Series keyed by (alpha, n) in order of first appearance.
  std::vector<std::pair<double, int>> keys;
  std::vector<double> eps_values;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const ReportRow& r : table.rows) {
    if (std::find(keys.begin(), keys.end(), std::make_pair(r.alpha, r.n)) == keys.end()) keys.emplace_back(r.alpha, r.n);
    if (std::find(eps_values.begin(), eps_values.end(), r.eps) == eps_values.end()) eps_values.push_back(r.eps);
    for (double v : {r.value, r.reference}) {
      if (std::isfinite(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!(lo <= hi)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  for (double e : eps_values) {
    xmin = std::min(xmin, -std::log2(e));
    xmax = std::max(xmax, -std::log2(e));
  }
  if (!(xmin < xmax)) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double eps) { return kLeft + pw * (-std::log2(eps) - xmin) / (xmax - xmin); };
  const auto py = [&](double v) { return kTop + ph * (hi - v) / (hi - lo); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << kLeft << "\" y=\"20\" font-size=\"14\">" << table.name << "</text>\n";
  s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    s << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed("%.2f", py(v) + 4) << "\" text-anchor=\"end\">"
      << fixed("%.4g", v) << "</text>\n";
  }
  for (double e : eps_values) {
    s << "<text x=\"" << fixed("%.2f", px(e)) << "\" y=\"" << kHeight - kBottom + 18 << "\" text-anchor=\"middle\">"
      << eps_label(e) << "</text>\n";
  }
  s << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">eps</text>\n";
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    std::string values, refs;
    for (const ReportRow& r : table.rows) {
      if (r.alpha != keys[k].first || r.n != keys[k].second) continue;
      if (std::isfinite(r.value)) values += fixed("%.2f", px(r.eps)) + "," + fixed("%.2f", py(r.value)) + " ";
      if (std::isfinite(r.reference)) refs += fixed("%.2f", px(r.eps)) + "," + fixed("%.2f", py(r.reference)) + " ";
      if (std::isfinite(r.value)) {
        s << "<circle cx=\"" << fixed("%.2f", px(r.eps)) << "\" cy=\"" << fixed("%.2f", py(r.value))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"" << values << "\"/>\n";
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-dasharray=\"4 3\" points=\"" << refs << "\"/>\n";
    const double ly = kTop + 16.0 * (k + 1);
    s << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kWidth - kRight + 30
      << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\"/>\n";
    s << "<text x=\"" << kWidth - kRight + 36 << "\" y=\"" << ly << "\">alpha=" << fixed("%g", keys[k].first)
      << " n=" << keys[k].second << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string summary_text(const ExperimentReport& report) {
  std::ostringstream s;
  s << "experiment: " << report.experiment << "\n";
  for (const Table& t : report.tables) {
    s << "\ntable " << t.name << ": " << t.quantity << "\n";
    for (const Check& c : t.checks) {
      s << "  [" << to_string(c.verdict) << "] alpha=" << fixed("%g", c.alpha) << " n=" << c.n << " " << c.name
        << ": " << c.rule.describe() << "\n";
    }
  }
  if (!report.notes.empty()) {
    s << "\nnotes:\n";
    for (const std::string& n : report.notes) s << "  " << n << "\n";
  }
  s << "\noverall: " << (report.all_satisfied() ? "Satisfied" : "Violated") << "\n";
  return s.str();
}

std::vector<std::filesystem::path> emit(const ExperimentReport& report, const std::filesystem::path& dir,
                                        const std::vector<Format>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  const auto write = [&](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    written.push_back(path);
  };
  for (const Table& t : report.tables) {
    const std::string stem = report.experiment + "_" + t.name;
    for (Format f : formats) {
      if (f == Format::Csv) write(dir / (stem + ".csv"), to_csv(t));
      if (f == Format::Svg) write(dir / (stem + ".svg"), to_svg(t));
    }
  }
  write(dir / (report.experiment + "_summary.txt"), summary_text(report));
  return written;
}

}  // namespace steklov::lab
