#include "whitemetric/errors.hpp"

namespace whitemetric {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::degenerate_coordinate: return "DegenerateCoordinate";
    case ErrorCode::near_singular: return "NearSingular";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::size_limit_exceeded: return "SizeLimitExceeded";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::zero_mean: return "ZeroMean";
    case ErrorCode::rank_deficient: return "RankDeficient";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::parse_error: return "ParseError";
  }
  return "Unknown";
}

}  // namespace whitemetric
