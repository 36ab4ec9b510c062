#include "pfqr/csv.hpp"
#include "pfqr/error.hpp"
#include "pfqr/report_io.hpp"
#include "pfqr/svg_plot.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

namespace pfqr {
namespace {

namespace fs = std::filesystem;

std::string error_text(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pfqr_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.0, -0.0, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.1 + 0.2}) {
    EXPECT_EQ(parse_double(format_double(v)), v) << format_double(v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_TRUE(std::isnan(parse_double(format_double(NAN))));
  EXPECT_THROW(parse_double("1.5x"), Error);
  EXPECT_THROW(parse_double(""), Error);
}

TEST(ParseCsv, ReadsHeaderAndRows) {
  std::istringstream in("\xEF\xBB\xBF" "a,b\r\n1,2\r\n3,4\n");
  const CsvTable t = parse_csv(in, "mem");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  const MatrixXd v = csv_numeric(t, "mem");
  EXPECT_DOUBLE_EQ(v(1, 0), 3.0);
}

TEST(ParseCsv, RaggedRowNamesLine) {
  std::istringstream in("a,b\n1,2\n3\n");
  const std::string msg = error_text([&] { parse_csv(in, "data.csv"); });
  EXPECT_NE(msg.find("data.csv"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ParseCsv, EmptyInputRejected) {
  std::istringstream in("");
  EXPECT_THROW(parse_csv(in, "empty.csv"), Error);
}

TEST(CsvNumeric, BadCellNamesRowAndColumn) {
  std::istringstream in("x,y,z\n1,2,3\n4,five,6\n");
  const CsvTable t = parse_csv(in, "vals.csv");
  try {
    csv_numeric(t, "vals.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("('y')"), std::string::npos) << msg;
  }
}

TEST_F(TempDir, CurvesRoundTrip) {
  const Grid grid = Grid::uniform(5);
  MatrixXd curves = MatrixXd::Random(3, 5);
  write_file_atomic(dir_ / "c.csv", curves_csv(grid, curves));
  const CurveFile back = read_curves_csv(dir_ / "c.csv");
  EXPECT_EQ(back.grid.size(), 5);
  EXPECT_EQ(back.curves, curves);
}

TEST_F(TempDir, CurvesWithNumericGridHeader) {
  write_file_atomic(dir_ / "g.csv", "0,0.5,1\n1,2,3\n");
  EXPECT_EQ(read_curves_csv(dir_ / "g.csv").grid.size(), 3);
  write_file_atomic(dir_ / "bad.csv", "0,0.7,1\n1,2,3\n");
  try {
    read_curves_csv(dir_ / "bad.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonUniformGrid);
  }
}

TEST_F(TempDir, AtomicWriteReplacesAndLeavesNoTemp) {
  const fs::path p = dir_ / "out.txt";
  write_file_atomic(p, "first");
  write_file_atomic(p, "second");
  EXPECT_EQ(read_text_file(p), "second");
  for (const auto& entry : fs::directory_iterator(dir_)) EXPECT_EQ(entry.path().filename(), "out.txt");
}

TEST_F(TempDir, MissingFileNamesPath) {
  try {
    read_text_file(dir_ / "nope.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
    EXPECT_NE(std::string(e.what()).find("nope.csv"), std::string::npos);
  }
}

EvalReport sample_report() {
  EvalReport r;
  for (Index k = 1; k <= 3; ++k) {
    for (MethodId m : {MethodId::PLS, MethodId::PQR}) {
      ReportCell c;
      c.scenario = "sim1";
      c.method = m;
      c.n = 100;
      c.k = k;
      c.bias2 = 1.0 / (3.0 * k);
      c.var = 0.1 * k;
      c.mise = c.bias2 + c.var;
      c.mse_in = k == 2 ? 250.0 : 1.25;
      c.completed = 10;
      r.cells.push_back(c);
    }
  }
  r.timings.push_back({"sim1", ErrorLaw::Gaussian, 100, 1.5});
  return r;
}

TEST(ReportCsv, RoundTripExact) {
  const EvalReport r = sample_report();
  const EvalReport back = parse_report_csv(report_csv(r));
  ASSERT_EQ(back.cells.size(), r.cells.size());
  for (std::size_t i = 0; i < r.cells.size(); ++i) EXPECT_TRUE(back.cells[i] == r.cells[i]) << i;
  EXPECT_EQ(report_csv(back), report_csv(r));
  EXPECT_TRUE(back.timings.empty());
  EXPECT_EQ(report_csv(r).substr(0, report_csv(r).find('\n')),
            "scenario,method,law,n,k,bias2,var,mise,mse_in,mse_out,completed,failed");
}

TEST(ReportCsv, RejectsBadHeader) {
  try {
    parse_report_csv("a,b\n1,2\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(ReportTable, FormatsOverflowAndMissing) {
  EXPECT_EQ(format_cell(0.456), "0.46");
  EXPECT_EQ(format_cell(150.0), ">100");
  EXPECT_EQ(format_cell(NAN), "-");
  const std::string table = report_table(sample_report());
  EXPECT_NE(table.find(">100"), std::string::npos);
  EXPECT_NE(table.find("pqr"), std::string::npos);
}

TEST(TimingCsv, Header) { EXPECT_EQ(timing_csv(sample_report()), "scenario,law,n,seconds\nsim1,gaussian,100,1.500\n"); }

TEST(Svg, DeterministicAndCapped) {
  LineChart chart{"t", "K", "MISE", {{"a", {1, 2, 3}, {0.5, 1e6, NAN}}}};
  const std::string a = render_svg(chart);
  EXPECT_EQ(a, render_svg(chart));
  EXPECT_EQ(a.rfind("<svg", 0), 0u);
  EXPECT_EQ(a.find("nan"), std::string::npos);
  EXPECT_EQ(a.find("inf"), std::string::npos);
}

TEST(Svg, ChartsPerBlockAndMetric) {
  const auto charts = report_charts(sample_report());
  ASSERT_EQ(charts.size(), 2u);  // mse_out is missing everywhere
  EXPECT_EQ(charts[0].file_name, "sim1_gaussian_n100_mise.svg");
  EXPECT_EQ(charts[0].chart.series.size(), 2u);
}

}  // namespace
}  // namespace pfqr
