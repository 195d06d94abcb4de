#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lemir {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
  public:
    using Error::Error;
};

/// A transformation rule cannot be applied to the given form.
class RuleIncompatible : public Error {
  public:
    using Error::Error;
};

/// Malformed input data. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
  public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line)
    {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Two sequences that must correspond token-for-token do not.
class AlignmentError : public Error {
  public:
    using Error::Error;
};

/// Anything that goes wrong while talking to an external scorer.
class ScorerError : public Error {
  public:
    using Error::Error;
};

class ScorerTimeout : public ScorerError {
  public:
    using ScorerError::ScorerError;
};

class ConnectionClosed : public ScorerError {
  public:
    using ScorerError::ScorerError;
};

/// The scorer answered a request with an error message.
class RemoteError : public ScorerError {
  public:
    using ScorerError::ScorerError;
};

enum class ProtocolErrorKind {
    Malformed,
    DimensionMismatch,
    OutOfRange,
    DuplicateRequestId,
    UnknownRequestId,
    VersionMismatch,
};

const char* to_string(ProtocolErrorKind kind) noexcept;

class ProtocolError : public ScorerError {
  public:
    ProtocolError(ProtocolErrorKind kind, const std::string& what)
        : ScorerError(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {}

    ProtocolErrorKind kind() const noexcept { return kind_; }

  private:
    ProtocolErrorKind kind_;
};

}  // namespace lemir
