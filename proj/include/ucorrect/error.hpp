#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ucorrect {

enum class ErrorCode {
  kEmptyInput,
  kMalformedLine,
  kInvalidConfig,
  kInvalidInput,
  kMaskIsSentinel,
  kProtocolError,
  kTimeout,
  kProcessExited,
  kLengthMismatch,
  kIo,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported as ucorrect::Error. MalformedLine errors
// carry the 1-based line number of the offending input line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line_no = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line_no() const noexcept { return line_no_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_no_;
};

}  // namespace ucorrect
