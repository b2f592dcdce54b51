#ifndef CSCORR_ERROR_H_
#define CSCORR_ERROR_H_

#include <stdexcept>
#include <string>

namespace cscorr {

enum class ErrorCode {
  kInvalidSpec,
  kShape,
  kDegenerateSystem,
  kDegenerateGram,
  kUndefinedRelativeError,
  kTooLarge,
  kBoundInapplicable,
  kIo,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception. Solver
// non-convergence is not an error; it is carried in the result status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSpec:
      return "invalid-spec";
    case ErrorCode::kShape:
      return "shape";
    case ErrorCode::kDegenerateSystem:
      return "degenerate-system";
    case ErrorCode::kDegenerateGram:
      return "degenerate-gram";
    case ErrorCode::kUndefinedRelativeError:
      return "undefined-relative-error";
    case ErrorCode::kTooLarge:
      return "too-large";
    case ErrorCode::kBoundInapplicable:
      return "bound-inapplicable";
    case ErrorCode::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace cscorr

#endif  // CSCORR_ERROR_H_
