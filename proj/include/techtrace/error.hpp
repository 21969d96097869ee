#pragma once

#include <stdexcept>
#include <string>

namespace techtrace {

// Every error raised by the library derives from Error. The kind string is
// stable and machine-readable; the CLI maps each kind to its own exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

// Malformed input. field() names the offending field ("section", "class",
// "year", ...); line() is the 1-based input line or 0 when not file-backed.
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what, long line = 0)
      : Error("parse", line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        field_(std::move(field)),
        line_(line) {}
  const std::string& field() const noexcept { return field_; }
  long line() const noexcept { return line_; }

 private:
  std::string field_;
  long line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

class EmptyCorpusError : public Error {
 public:
  explicit EmptyCorpusError(const std::string& what) : Error("empty_corpus", what) {}
};

class IndexError : public Error {
 public:
  explicit IndexError(const std::string& what) : Error("index", what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error("argument", what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error("numerical", what) {}
};

class StateError : public Error {
 public:
  explicit StateError(const std::string& what) : Error("state", what) {}
};

}  // namespace techtrace
