#ifndef MMFLOW_ERROR_HPP
#define MMFLOW_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mmflow {

enum class ErrorCode {
  invalid_argument,
  config,
  non_converged,
  invariant_failure,
  insufficient_points,
  cfl_degenerate,
  io,
};

/// Exception carrying a machine-readable code; the CLI maps codes to exit
/// statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, const std::string& message,
                    ErrorCode code = ErrorCode::invalid_argument) {
  if (!condition) throw Error(code, message);
}

}  // namespace mmflow

#endif  // MMFLOW_ERROR_HPP
