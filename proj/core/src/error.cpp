#include "pfqr/error.hpp"

namespace pfqr {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonUniformGrid: return "NonUniformGrid";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::RankDeficientDesign: return "RankDeficientDesign";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::DegenerateProbe: return "DegenerateProbe";
    case ErrorCode::AllZeroDirection: return "AllZeroDirection";
    case ErrorCode::DegenerateScore: return "DegenerateScore";
    case ErrorCode::InsufficientRank: return "InsufficientRank";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace pfqr
