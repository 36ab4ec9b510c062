#pragma once

#include "pfqr/error.hpp"
#include "pfqr/evalbench.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace pfqr::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kPartialFailure = 3,
  kMismatch = 4,
};

/// Exit code for a library error: schema/parse/IO problems map to 2,
/// grid and dimension mismatches to 4, everything else to 1.
int exit_code_for(ErrorCode code) noexcept;

struct SimulateSettings {
  BenchmarkConfig benchmark;
  bool plots = true;
};

/// Parses a simulate config document. Relative paths resolve against base_dir.
/// Throws Error(ParseError / InvalidArgument / IoError).
SimulateSettings parse_simulate_config(std::string_view json_text, const std::filesystem::path& base_dir);

struct FitTask {
  std::filesystem::path curves;
  std::optional<std::filesystem::path> scalars;
  std::filesystem::path responses;
  std::string responses_column;
  ExtractionConfig extraction;
  CheckLossSpec loss;
  CqrPrediction cqr_prediction = CqrPrediction::MedianLevel;
};

FitTask parse_fit_config(std::string_view json_text, const std::filesystem::path& base_dir);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pfqr::cli
