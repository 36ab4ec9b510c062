#pragma once

// Strict CSV dialect: comma separator, '.' decimal point, mandatory header,
// LF (or CRLF) line endings, no quoting.

#include "pfqr/fgrid.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pfqr {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Throws ParseError naming `source` and the offending line when the header is
/// missing or a row has the wrong number of fields.
CsvTable parse_csv(std::istream& in, std::string_view source);

/// Numeric view of the table body. Throws ParseError naming the row (1-based,
/// excluding the header) and column of the first non-numeric cell.
MatrixXd csv_numeric(const CsvTable& table, std::string_view source);

/// Curves file: header `t_1,...,t_m` (grid implied uniform) or the grid points
/// themselves, then one row per subject.
struct CurveFile {
  Grid grid;
  MatrixXd curves;
};

CurveFile read_curves_csv(const std::filesystem::path& path);
std::string curves_csv(const Grid& grid, const MatrixXd& curves);

/// Reads a whole file; throws IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temporary sibling file and a rename, so readers never observe
/// a truncated file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest text that parses back to exactly the same double ("nan", "inf",
/// "-inf" for non-finite values).
std::string format_double(double value);
/// Inverse of format_double; throws ParseError.
double parse_double(std::string_view text);

}  // namespace pfqr
