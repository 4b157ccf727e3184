#pragma once

#include <stdexcept>
#include <string>

namespace semfilter {

// Failure categories; the CLI maps each one onto a process exit code.
enum class ErrorKind { Config, Io, Backend, Codec };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};
struct BackendError : Error {
  explicit BackendError(const std::string& what) : Error(ErrorKind::Backend, what) {}
};
struct CodecError : Error {
  explicit CodecError(const std::string& what) : Error(ErrorKind::Codec, what) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Io: return 3;
    case ErrorKind::Backend: return 4;
    case ErrorKind::Codec: return 5;
  }
  return 1;
}

}  // namespace semfilter
