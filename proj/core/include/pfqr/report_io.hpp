#pragma once

#include "pfqr/evalbench.hpp"

#include <string>
#include <string_view>

namespace pfqr {

/// One row per cell; doubles written in shortest round-trip form so
/// parse_report_csv(report_csv(r)) reproduces every cell exactly.
std::string report_csv(const EvalReport& report);
/// Cells only; timings live in their own file. Throws ParseError.
EvalReport parse_report_csv(std::string_view text, std::string_view source = "report.csv");

std::string timing_csv(const EvalReport& report);

/// Fixed-width text tables, one block per (scenario, error law), two
/// decimals, values above 100 shown as ">100".
std::string report_table(const EvalReport& report);

/// "12.34", or ">100" above the overflow threshold, "-" for missing values.
std::string format_cell(double value);

}  // namespace pfqr
