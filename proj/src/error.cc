#include "blockgnn/error.h"

namespace blockgnn {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownMnemonic: return "UnknownMnemonic";
    case ErrorCode::kMalformedOperand: return "MalformedOperand";
    case ErrorCode::kEmptyBlock: return "EmptyBlock";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kNotScalar: return "NotScalar";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kUnknownTask: return "UnknownTask";
    case ErrorCode::kNonPositiveActual: return "NonPositiveActual";
    case ErrorCode::kMissingTaskLabel: return "MissingTaskLabel";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kDuplicateKeyConflict: return "DuplicateKeyConflict";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kBadCheckpoint: return "BadCheckpoint";
  }
  return "Unknown";
}

ErrorCategory CategoryOf(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kUnknownTask:
    case ErrorCode::kBadCheckpoint:
      return ErrorCategory::kConfig;
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kNonFiniteValue:
    case ErrorCode::kNotScalar:
    case ErrorCode::kIndexOutOfRange:
    case ErrorCode::kNonFiniteLoss:
    case ErrorCode::kLengthMismatch:
      return ErrorCategory::kNumeric;
    default:
      return ErrorCategory::kData;
  }
}

}  // namespace blockgnn
