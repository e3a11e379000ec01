#include "ucorrect/error.hpp"

namespace ucorrect {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kMaskIsSentinel: return "MaskIsSentinel";
    case ErrorCode::kProtocolError: return "ProtocolError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kProcessExited: return "ProcessExited";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           std::optional<std::size_t> line_no) {
  std::string out(to_string(code));
  if (line_no) out += "(" + std::to_string(*line_no) + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> line_no)
    : std::runtime_error(format_message(code, message, line_no)),
      code_(code),
      line_no_(line_no) {}

}  // namespace ucorrect
