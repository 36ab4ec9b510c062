#include "pfqr/csv.hpp"

#include "pfqr/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace pfqr {

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view text, double& value) {
  text = trim(text);
  if (text.empty()) return false;
  if (text == "nan") {
    value = NAN;
    return true;
  }
  if (text == "inf") {
    value = INFINITY;
    return true;
  }
  if (text == "-inf") {
    value = -INFINITY;
    return true;
  }
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

CsvTable parse_csv(std::istream& in, std::string_view source) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    std::vector<std::string> fields = split_line(line);
    for (auto& f : fields) f = std::string(trim(f));
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::ParseError, std::string(source) + ": line " + std::to_string(line_no) + " has " +
                                             std::to_string(fields.size()) + " fields, the header has " +
                                             std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw Error(ErrorCode::ParseError, std::string(source) + ": missing header row");
  return table;
}

MatrixXd csv_numeric(const CsvTable& table, std::string_view source) {
  const auto rows = static_cast<Index>(table.rows.size());
  const auto cols = static_cast<Index>(table.header.size());
  MatrixXd out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const std::string& cell = table.rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      double value = 0.0;
      if (!parse_number(cell, value)) {
        throw Error(ErrorCode::ParseError, std::string(source) + ": row " + std::to_string(r + 1) + ", column " +
                                               std::to_string(c + 1) + " ('" +
                                               table.header[static_cast<std::size_t>(c)] + "') is not a number: '" +
                                               cell + "'");
      }
      out(r, c) = value;
    }
  }
  return out;
}

CurveFile read_curves_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  const std::string source = path.string();
  const CsvTable table = parse_csv(in, source);
  const auto m = static_cast<Index>(table.header.size());
  if (m < 2) throw Error(ErrorCode::ParseError, source + ": curves need at least 2 grid columns");

  bool labelled = true;
  for (Index j = 0; j < m && labelled; ++j) {
    labelled = table.header[static_cast<std::size_t>(j)] == "t_" + std::to_string(j + 1);
  }
  Grid grid = Grid::uniform(m);
  if (!labelled) {
    VectorXd points(m);
    for (Index j = 0; j < m; ++j) {
      if (!parse_number(table.header[static_cast<std::size_t>(j)], points(j))) {
        throw Error(ErrorCode::ParseError, source + ": header column " + std::to_string(j + 1) +
                                               " is neither t_" + std::to_string(j + 1) + " nor a grid point");
      }
    }
    grid = Grid::from_points(points);
  }
  MatrixXd curves = csv_numeric(table, source);
  if (!curves.allFinite()) throw Error(ErrorCode::ParseError, source + ": curves contain non-finite values");
  return {std::move(grid), std::move(curves)};
}

std::string curves_csv(const Grid& grid, const MatrixXd& curves) {
  std::string out;
  for (Index j = 0; j < grid.size(); ++j) {
    if (j > 0) out += ',';
    out += "t_" + std::to_string(j + 1);
  }
  out += '\n';
  for (Index i = 0; i < curves.rows(); ++i) {
    for (Index j = 0; j < curves.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(curves(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "failed reading '" + path.string() + "'");
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move output into place at '" + path.string() + "'");
  }
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  if (!parse_number(text, value)) throw Error(ErrorCode::ParseError, "not a number: '" + std::string(text) + "'");
  return value;
}

}  // namespace pfqr
