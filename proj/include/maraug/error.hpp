#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace maraug {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  MalformedLine,
  OutOfRange,
  RemapIncomplete,
  IdCollision,
  MissingSource,
  DecodeFailure,
  WriteFailure,
  EmptyGroup,
  GroupMismatch,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::RemapIncomplete: return "RemapIncomplete";
    case ErrorCode::IdCollision: return "IdCollision";
    case ErrorCode::MissingSource: return "MissingSource";
    case ErrorCode::DecodeFailure: return "DecodeFailure";
    case ErrorCode::WriteFailure: return "WriteFailure";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::GroupMismatch: return "GroupMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Exception type used throughout the library. `path` and `line` are
/// filled in when the failure can be pinned to a file location
/// (line numbers are 1-based, 0 means "not applicable").
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string path = {},
        std::size_t line = 0)
      : std::runtime_error(format(code, message, path, line)),
        code_(code),
        message_(message),
        path_(std::move(path)),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code/location prefix.
  const std::string& message() const noexcept { return message_; }
  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(ErrorCode code, const std::string& message,
                            const std::string& path, std::size_t line) {
    std::string out{to_string(code)};
    if (!path.empty()) {
      out += " [" + path;
      if (line > 0) out += ":" + std::to_string(line);
      out += "]";
    } else if (line > 0) {
      out += " [line " + std::to_string(line) + "]";
    }
    out += ": " + message;
    return out;
  }

  ErrorCode code_;
  std::string message_;
  std::string path_;
  std::size_t line_;
};

}  // namespace maraug
