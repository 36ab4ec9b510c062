#pragma once

#include <stdexcept>
#include <string>

namespace pfqr {

enum class ErrorCode {
  InvalidArgument,
  GridMismatch,
  NonUniformGrid,
  DimensionMismatch,
  NonFinite,
  DegenerateColumn,
  RankDeficient,
  RankDeficientDesign,
  SolverDiverged,
  DegenerateProbe,
  AllZeroDirection,
  DegenerateScore,
  InsufficientRank,
  ParseError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Library-wide exception; the code lets callers (the CLI in particular) map
/// failures onto exit statuses without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pfqr
