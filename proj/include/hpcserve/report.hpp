#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hpcserve/bench.hpp"

namespace hpcserve {

// Columnar plot data. One commented header row naming the columns, one row
// per point. Numbers use 6 significant digits; failed points carry "-" in
// every metric column (gnuplot: set datafile missing "-").
std::string emit_plot_data(const BenchSeries& series);
BenchSeries parse_plot_data(std::string_view text);

struct ComparisonRow {
  int concurrency = 0;
  std::optional<double> throughput_a;
  std::optional<double> throughput_b;
  std::optional<double> ratio;
};

struct ComparisonSummary {
  std::string label_a;
  std::string label_b;
  // a / b output token throughput at concurrency 1.
  std::optional<double> batch1_ratio;
  // Peak ok throughput of a over peak ok throughput of b, common grid only.
  std::optional<double> peak_ratio;
  std::vector<ComparisonRow> rows;
  std::vector<std::string> warnings;
};

// Uses the intersection of the two sweep grids. Throws NoCommonPoints.
ComparisonSummary compare(const BenchSeries& a, const BenchSeries& b);
std::string format_comparison(const ComparisonSummary& summary);

// One row per series: label, batch-1 throughput, peak throughput, peak
// concurrency, failure count.
std::string summarize(const std::vector<BenchSeries>& series);

}  // namespace hpcserve
