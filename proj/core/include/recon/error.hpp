#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace recon {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or precondition violation on user-supplied settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A sequence that has no tokens where at least one is required.
class EmptySequenceError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateIdError : public ParseError {
 public:
  DuplicateIdError(const std::string& id, std::size_t line)
      : ParseError("duplicate id \"" + id + "\"", line), id_(id) {}

  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace recon
