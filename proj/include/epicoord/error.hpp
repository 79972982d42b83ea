#pragma once

#include <stdexcept>
#include <string>

namespace epicoord {

/// A state outside the modeled world (pose out of bounds, inside an obstacle).
class InvalidStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Scenario or parameter validation failure.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document; carries a 1-based line/column when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// The evidence stream drove every hypothesis weight to zero.
class InconsistentEvidenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace epicoord
