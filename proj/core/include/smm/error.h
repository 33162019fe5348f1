#ifndef SMM_ERROR_H_
#define SMM_ERROR_H_

#include <stdexcept>
#include <string>

namespace smm {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kSupport,
  kConvergence,
  kConfig,
  kIo,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Thrown by iterative routines; carries the last residual reached.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double residual)
      : Error(ErrorCode::kConvergence, message), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

inline void Require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) Fail(code, message);
}

}  // namespace smm

#endif  // SMM_ERROR_H_
