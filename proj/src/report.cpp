#include "hpcserve/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "hpcserve/error.hpp"

namespace hpcserve {

namespace {

constexpr std::string_view kHeader =
    "# concurrency output_token_throughput request_throughput mean_ttft p99_ttft mean_tpot status";

std::string sig6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string cell(const std::optional<double>& v) { return v ? sig6(*v) : "n/a"; }

std::optional<double> ok_throughput(const BenchSeries& s, int concurrency) {
  for (const auto& p : s.points) {
    if (p.concurrency == concurrency && p.status == PointStatus::ok) return p.output_token_throughput;
  }
  return std::nullopt;
}

const BenchPoint* peak_point(const BenchSeries& s) {
  const BenchPoint* best = nullptr;
  for (const auto& p : s.points) {
    if (p.status != PointStatus::ok) continue;
    if (!best || p.output_token_throughput > best->output_token_throughput) best = &p;
  }
  return best;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& r : rows) {
    widths.resize(std::max(widths.size(), r.size()));
    for (std::size_t i = 0; i < r.size(); ++i) widths[i] = std::max(widths[i], r[i].size());
  }
  std::ostringstream os;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(widths[i] - r[i].size() + 2, ' ');
    }
    os << line << '\n';
  }
  return os.str();
}

}  // namespace

std::string emit_plot_data(const BenchSeries& series) {
  if (series.points.empty())
    throw Error(ErrorKind::empty_series, "series '" + series.label + "' has no points");
  std::ostringstream os;
  os << "# label: " << series.label << '\n';
  os << kHeader << '\n';
  for (const auto& p : series.points) {
    os << p.concurrency;
    if (p.status == PointStatus::ok) {
      for (double v : {p.output_token_throughput, p.request_throughput, p.mean_ttft_ms,
                       p.p99_ttft_ms, p.mean_tpot_ms})
        os << ' ' << sig6(v);
    } else {
      os << " - - - - -";
    }
    os << ' ' << to_string(p.status) << '\n';
  }
  return os.str();
}

BenchSeries parse_plot_data(std::string_view text) {
  BenchSeries s;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# label: ", 0) == 0) s.label = line.substr(9);
      continue;
    }
    std::istringstream row(line);
    std::vector<std::string> cols;
    for (std::string c; row >> c;) cols.push_back(c);
    if (cols.size() != 7)
      throw ParseError("plot data line " + std::to_string(lineno) + ": expected 7 columns", lineno);
    BenchPoint p;
    p.concurrency = std::atoi(cols[0].c_str());
    p.status = parse_point_status(cols[6]);
    if (p.status == PointStatus::ok) {
      double* fields[] = {&p.output_token_throughput, &p.request_throughput, &p.mean_ttft_ms,
                          &p.p99_ttft_ms, &p.mean_tpot_ms};
      for (std::size_t i = 0; i < 5; ++i) {
        char* end = nullptr;
        *fields[i] = std::strtod(cols[i + 1].c_str(), &end);
        if (*end != '\0')
          throw ParseError("plot data line " + std::to_string(lineno) + ": bad number '" +
                               cols[i + 1] + "'",
                           lineno);
      }
    }
    s.points.push_back(p);
  }
  validate(s);
  return s;
}

ComparisonSummary compare(const BenchSeries& a, const BenchSeries& b) {
  ComparisonSummary out;
  out.label_a = a.label;
  out.label_b = b.label;

  std::map<int, bool> grid_a, grid_b;
  for (const auto& p : a.points) grid_a[p.concurrency] = true;
  for (const auto& p : b.points) grid_b[p.concurrency] = true;
  std::vector<int> common;
  for (const auto& [c, _] : grid_a) {
    if (grid_b.count(c)) common.push_back(c);
  }
  if (common.empty())
    throw Error(ErrorKind::no_common_points,
                "series '" + a.label + "' and '" + b.label + "' share no concurrency levels");
  if (common.size() != grid_a.size() || common.size() != grid_b.size())
    out.warnings.push_back("sweep grids differ; comparing " + std::to_string(common.size()) +
                           " common concurrency levels");

  std::optional<double> peak_a, peak_b;
  for (int c : common) {
    ComparisonRow row;
    row.concurrency = c;
    row.throughput_a = ok_throughput(a, c);
    row.throughput_b = ok_throughput(b, c);
    if (row.throughput_a && row.throughput_b) row.ratio = *row.throughput_a / *row.throughput_b;
    if (row.throughput_a && (!peak_a || *row.throughput_a > *peak_a)) peak_a = row.throughput_a;
    if (row.throughput_b && (!peak_b || *row.throughput_b > *peak_b)) peak_b = row.throughput_b;
    out.rows.push_back(row);
  }
  if (!out.rows.empty() && out.rows.front().concurrency == 1) out.batch1_ratio = out.rows.front().ratio;
  if (peak_a && peak_b) out.peak_ratio = *peak_a / *peak_b;
  return out;
}

std::string format_comparison(const ComparisonSummary& summary) {
  std::vector<std::vector<std::string>> rows = {
      {"concurrency", summary.label_a, summary.label_b, "ratio"}};
  for (const auto& r : summary.rows)
    rows.push_back({std::to_string(r.concurrency), cell(r.throughput_a), cell(r.throughput_b),
                    cell(r.ratio)});
  std::string out = render_table(rows);
  out += "batch1_ratio " + cell(summary.batch1_ratio) + "\n";
  out += "peak_ratio   " + cell(summary.peak_ratio) + "\n";
  for (const auto& w : summary.warnings) out += "warning: " + w + "\n";
  return out;
}

std::string summarize(const std::vector<BenchSeries>& series) {
  std::vector<std::vector<std::string>> rows = {
      {"label", "batch1_tok/s", "peak_tok/s", "peak_concurrency", "failures"}};
  for (const auto& s : series) {
    const BenchPoint* peak = peak_point(s);
    const auto failures = std::count_if(s.points.begin(), s.points.end(),
                                        [](const BenchPoint& p) { return p.status != PointStatus::ok; });
    rows.push_back({s.label, cell(ok_throughput(s, 1)),
                    peak ? sig6(peak->output_token_throughput) : "n/a",
                    peak ? std::to_string(peak->concurrency) : "n/a", std::to_string(failures)});
  }
  return render_table(rows);
}

}  // namespace hpcserve
