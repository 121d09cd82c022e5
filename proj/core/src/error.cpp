#include "vmot/error.hpp"

namespace vmot {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidMarginal: return "InvalidMarginal";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kConvexOrderViolation: return "ConvexOrderViolation";
    case ErrorKind::kGridBudgetExceeded: return "GridBudgetExceeded";
    case ErrorKind::kPayoffParseError: return "PayoffParseError";
    case ErrorKind::kNonFiniteCost: return "NonFiniteCost";
    case ErrorKind::kInfeasible: return "Infeasible";
    case ErrorKind::kUnbounded: return "Unbounded";
    case ErrorKind::kIterationLimit: return "IterationLimit";
    case ErrorKind::kStalled: return "Stalled";
    case ErrorKind::kNumericUnderflow: return "NumericUnderflow";
    case ErrorKind::kInvalidSchedule: return "InvalidSchedule";
    case ErrorKind::kInconsistentDuals: return "InconsistentDuals";
    case ErrorKind::kAnchorOutsideDomain: return "AnchorOutsideDomain";
    case ErrorKind::kDimensionUnsupported: return "DimensionUnsupported";
    case ErrorKind::kEnvelopeDegenerate: return "EnvelopeDegenerate";
    case ErrorKind::kMismatchedInstance: return "MismatchedInstance";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace vmot
