#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ocep {

/// Base of every error raised by the library. Catch this at process
/// boundaries; catch the subclasses where the distinction matters.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` is 1-based, 0 when not line oriented.
class ParseError : public Error {
public:
  ParseError(const std::string& message, std::size_t line = 0, std::string text = {})
      : Error(line == 0 ? message
                        : "line " + std::to_string(line) + ": " + message +
                              (text.empty() ? std::string{} : " in '" + text + "'")),
        line_(line),
        text_(std::move(text)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& text() const noexcept { return text_; }

private:
  std::size_t line_;
  std::string text_;
};

/// Well-formed input that uses a construct outside the supported subset.
class UnsupportedFeature : public Error {
public:
  explicit UnsupportedFeature(std::string construct)
      : Error("unsupported feature: " + construct), construct_(std::move(construct)) {}

  const std::string& construct() const noexcept { return construct_; }

private:
  std::string construct_;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Input is syntactically fine but misses a required column or field.
class SchemaError : public Error {
public:
  using Error::Error;
};

/// Value outside the domain of a function (step model, classification).
class DomainError : public Error {
public:
  using Error::Error;
};

class InsufficientHistory : public Error {
public:
  InsufficientHistory(std::size_t have, std::size_t need)
      : Error("insufficient history: have " + std::to_string(have) + " samples, need " +
              std::to_string(need)) {}
};

/// Event arrived with a timestamp older than its stream's last event.
class OrderingError : public Error {
public:
  using Error::Error;
};

/// A stream-bus partition has no live in-sync replica.
class Unavailable : public Error {
public:
  using Error::Error;
};

class CycleError : public Error {
public:
  explicit CycleError(std::string cls)
      : Error("subclass cycle through " + cls), class_name_(std::move(cls)) {}

  const std::string& class_name() const noexcept { return class_name_; }

private:
  std::string class_name_;
};

/// Broken internal invariant. Never expected in a correct build.
class InternalError : public Error {
public:
  using Error::Error;
};

}  // namespace ocep
