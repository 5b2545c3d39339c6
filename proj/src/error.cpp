#include "spdelab/error.hpp"

namespace spdelab {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::MissingProvenance: return "MissingProvenance";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Runtime: return "RuntimeError";
  }
  return "Unknown";
}

}  // namespace spdelab
