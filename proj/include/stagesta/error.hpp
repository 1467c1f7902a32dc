#ifndef STAGESTA_ERROR_HPP
#define STAGESTA_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stagesta {

enum class ErrorKind {
  kInvalidConfig,
  kInvalidModel,
  kInvalidCorner,
  kCyclicGraph,
  kUnknownRegister,
  kUnclassifiable,
  kInsufficientSamples,
  kParseError,
  kEmptyInput,
  kIoFailure,
};

const char* to_string(ErrorKind kind);

// Analysis-domain failure. The CLI maps every Error to exit status 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Malformed interchange input; line is 1-based, 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(ErrorKind::kParseError,
              (line > 0 ? "line " + std::to_string(line) + ": " : std::string()) + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

}  // namespace stagesta

#endif  // STAGESTA_ERROR_HPP
