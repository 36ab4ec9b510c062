#include "pfqr/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <tuple>

namespace pfqr {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.3g", v);
  return buffer;
}

}  // namespace

std::string render_svg(const LineChart& chart) {
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const PlotSeries& s : chart.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || std::isnan(s.y[i])) continue;
      const double y = std::min(s.y[i], chart.y_cap);
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
    y_lo = 0.0;
    y_hi = 1.0;
  }
  y_lo = std::min(y_lo, 0.0);
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
                    num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(chart.title) + "</text>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + plot_h) + "\" x2=\"" + num(kLeft + plot_w) +
         "\" y2=\"" + num(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
         num(kTop + plot_h) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x_lo + (x_hi - x_lo) * t / 4.0;
    const double yv = y_lo + (y_hi - y_lo) * t / 4.0;
    svg += "<text x=\"" + num(px(xv)) + "\" y=\"" + num(kTop + plot_h + 16) + "\" text-anchor=\"middle\">" +
           tick_label(xv) + "</text>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(yv) + 4) + "\" text-anchor=\"end\">" +
           tick_label(yv) + "</text>\n";
  }
  svg += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(kHeight - 10) + "\" text-anchor=\"middle\">" +
         escape(chart.x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + num(kTop + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(kTop + plot_h / 2) + ")\">" + escape(chart.y_label) + "</text>\n";

  for (std::size_t si = 0; si < chart.series.size(); ++si) {
    const PlotSeries& s = chart.series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || std::isnan(s.y[i])) continue;
      if (!points.empty()) points += ' ';
      points += num(px(s.x[i])) + ',' + num(py(std::min(s.y[i], chart.y_cap)));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + points +
           "\"/>\n";
    const double ly = kTop + 16.0 * static_cast<double>(si);
    svg += "<line x1=\"" + num(kWidth - kRight + 15) + "\" y1=\"" + num(ly) + "\" x2=\"" +
           num(kWidth - kRight + 35) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(kWidth - kRight + 40) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<NamedChart> report_charts(const EvalReport& report) {
  std::vector<std::tuple<std::string, ErrorLaw, Index>> blocks;
  for (const ReportCell& c : report.cells) {
    const auto key = std::make_tuple(c.scenario, c.law, c.n);
    if (std::find(blocks.begin(), blocks.end(), key) == blocks.end()) blocks.push_back(key);
  }
  struct Metric {
    const char* name;
    const char* label;
    double ReportCell::*field;
  };
  const Metric metrics[] = {{"mise", "MISE", &ReportCell::mise},
                            {"mse_in", "MSE (in-sample)", &ReportCell::mse_in},
                            {"mse_out", "MSE (out-of-sample)", &ReportCell::mse_out}};

  std::vector<NamedChart> charts;
  for (const auto& [scenario, law, n] : blocks) {
    std::vector<MethodId> methods;
    std::vector<Index> ks;
    for (const ReportCell& c : report.cells) {
      if (c.scenario != scenario || c.law != law || c.n != n) continue;
      if (std::find(methods.begin(), methods.end(), c.method) == methods.end()) methods.push_back(c.method);
      if (std::find(ks.begin(), ks.end(), c.k) == ks.end()) ks.push_back(c.k);
    }
    if (ks.size() < 2) continue;
    for (const Metric& metric : metrics) {
      LineChart chart;
      chart.title = scenario + ", " + std::string(to_string(law)) + " errors, n=" + std::to_string(n);
      chart.x_label = "K";
      chart.y_label = metric.label;
      bool any = false;
      for (MethodId method : methods) {
        PlotSeries s;
        s.name = std::string(to_string(method));
        for (const ReportCell& c : report.cells) {
          if (c.scenario != scenario || c.law != law || c.n != n || c.method != method) continue;
          s.x.push_back(static_cast<double>(c.k));
          s.y.push_back(c.*metric.field);
          any = any || !std::isnan(c.*metric.field);
        }
        chart.series.push_back(std::move(s));
      }
      if (!any) continue;
      charts.push_back({scenario + "_" + std::string(to_string(law)) + "_n" + std::to_string(n) + "_" + metric.name +
                            ".svg",
                        std::move(chart)});
    }
  }
  return charts;
}

}  // namespace pfqr
