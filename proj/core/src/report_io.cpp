#include "pfqr/report_io.hpp"

#include "pfqr/csv.hpp"
#include "pfqr/error.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace pfqr {

namespace {

constexpr const char* kHeader = "scenario,method,law,n,k,bias2,var,mise,mse_in,mse_out,completed,failed";

Index parse_index(std::string_view text, std::string_view what) {
  const double v = parse_double(text);
  if (v != static_cast<double>(static_cast<Index>(v))) {
    throw Error(ErrorCode::ParseError, std::string(what) + " is not an integer: '" + std::string(text) + "'");
  }
  return static_cast<Index>(v);
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace

std::string format_cell(double value) {
  if (std::isnan(value)) return "-";
  if (value > kOverflowThreshold) return ">100";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", value);
  return buffer;
}

std::string report_csv(const EvalReport& report) {
  std::string out = kHeader;
  out += '\n';
  for (const ReportCell& c : report.cells) {
    out += c.scenario + ',' + std::string(to_string(c.method)) + ',' + std::string(to_string(c.law)) + ',' +
           std::to_string(c.n) + ',' + std::to_string(c.k) + ',' + format_double(c.bias2) + ',' +
           format_double(c.var) + ',' + format_double(c.mise) + ',' + format_double(c.mse_in) + ',' +
           format_double(c.mse_out) + ',' + std::to_string(c.completed) + ',' + std::to_string(c.failed) + '\n';
  }
  return out;
}

EvalReport parse_report_csv(std::string_view text, std::string_view source) {
  std::istringstream in{std::string(text)};
  const CsvTable table = parse_csv(in, source);
  std::string header;
  for (std::size_t i = 0; i < table.header.size(); ++i) header += (i ? "," : "") + table.header[i];
  if (header != kHeader) throw Error(ErrorCode::ParseError, std::string(source) + ": unexpected header '" + header + "'");
  EvalReport report;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    try {
      ReportCell c;
      c.scenario = f[0];
      c.method = method_from_string(f[1]);
      c.law = error_law_from_string(f[2]);
      c.n = parse_index(f[3], "n");
      c.k = parse_index(f[4], "k");
      c.bias2 = parse_double(f[5]);
      c.var = parse_double(f[6]);
      c.mise = parse_double(f[7]);
      c.mse_in = parse_double(f[8]);
      c.mse_out = parse_double(f[9]);
      c.completed = static_cast<int>(parse_index(f[10], "completed"));
      c.failed = static_cast<int>(parse_index(f[11], "failed"));
      report.cells.push_back(std::move(c));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, std::string(source) + ": row " + std::to_string(r + 1) + ": " + e.what());
    }
  }
  return report;
}

std::string timing_csv(const EvalReport& report) {
  std::string out = "scenario,law,n,seconds\n";
  for (const BlockTiming& t : report.timings) {
    char seconds[32];
    std::snprintf(seconds, sizeof seconds, "%.3f", t.seconds);
    out += t.scenario + ',' + std::string(to_string(t.law)) + ',' + std::to_string(t.n) + ',' + seconds + '\n';
  }
  return out;
}

std::string report_table(const EvalReport& report) {
  // Blocks in first-appearance order.
  std::vector<std::pair<std::string, ErrorLaw>> blocks;
  for (const ReportCell& c : report.cells) {
    const auto key = std::make_pair(c.scenario, c.law);
    if (std::find(blocks.begin(), blocks.end(), key) == blocks.end()) blocks.push_back(key);
  }
  std::ostringstream out;
  for (const auto& [scenario, law] : blocks) {
    out << scenario << " / " << to_string(law) << " errors\n";
    out << pad("method", 8) << pad("K", 4) << pad("n", 6) << pad("Bias2", 9) << pad("Var", 9) << pad("MISE", 9)
        << pad("MSE-in", 9) << pad("MSE-out", 9) << pad("fail", 6) << '\n';
    for (const ReportCell& c : report.cells) {
      if (c.scenario != scenario || c.law != law) continue;
      out << pad(std::string(to_string(c.method)), 8) << pad(std::to_string(c.k), 4) << pad(std::to_string(c.n), 6)
          << pad(format_cell(c.bias2), 9) << pad(format_cell(c.var), 9) << pad(format_cell(c.mise), 9)
          << pad(format_cell(c.mse_in), 9) << pad(format_cell(c.mse_out), 9) << pad(std::to_string(c.failed), 6)
          << '\n';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace pfqr
