#pragma once

#include "pfqr/evalbench.hpp"

#include <string>
#include <vector>

namespace pfqr {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  /// Values above the cap are drawn at the cap; non-finite points are skipped.
  double y_cap = kOverflowThreshold;
};

/// Self-contained SVG document; output depends only on the chart contents.
std::string render_svg(const LineChart& chart);

struct NamedChart {
  std::string file_name;  // e.g. "sim1_gaussian_n100_mise.svg"
  LineChart chart;
};

/// Metric-versus-K charts, one per (scenario, law, n, metric), one series per
/// method. Blocks with a single K value produce no chart.
std::vector<NamedChart> report_charts(const EvalReport& report);

}  // namespace pfqr
