#include "equiplan/error.hpp"

namespace equiplan {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidOrder: return "invalid-order";
    case ErrorCode::kConstruction: return "construction";
    case ErrorCode::kNoStandardRep: return "no-standard-rep";
    case ErrorCode::kGroupMismatch: return "group-mismatch";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kState: return "state";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kSymmetry: return "symmetry";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kInvariantViolation: return "invariant-violation";
  }
  return "unknown";
}

}  // namespace equiplan
