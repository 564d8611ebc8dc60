#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blockgnn {

enum class ErrorCode {
  kUnknownMnemonic,
  kMalformedOperand,
  kEmptyBlock,
  kSchemaViolation,
  kEmptyCorpus,
  kShapeMismatch,
  kNonFiniteValue,
  kNotScalar,
  kIndexOutOfRange,
  kUnknownTask,
  kNonPositiveActual,
  kMissingTaskLabel,
  kNonFiniteLoss,
  kTooFewSamples,
  kMalformedRow,
  kDuplicateKeyConflict,
  kLengthMismatch,
  kInvalidConfig,
  kIo,
  kBadCheckpoint,
};

// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorCategory { kConfig, kData, kNumeric };

std::string_view ErrorCodeName(ErrorCode code);
ErrorCategory CategoryOf(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return CategoryOf(code_); }

 private:
  ErrorCode code_;
};

}  // namespace blockgnn
