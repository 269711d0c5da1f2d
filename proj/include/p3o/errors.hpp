#pragma once

#include <stdexcept>
#include <string>

namespace p3o {

// Base for every library error. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model, policy or config violates an invariant. field() names the
// offending entry, e.g. "trans[0][1][0]".
class ValidationError : public Error {
 public:
  explicit ValidationError(std::string field, const std::string& why = "")
      : Error(why.empty() ? "invalid " + field : "invalid " + field + ": " + why),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Malformed input file. line() is 1-based, 0 when not line oriented.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, long line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        reason_(what),
        line_(line) {}
  long line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
  long line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class HistoryExplosion : public Error {
 public:
  using Error::Error;
};

class UnknownHistoryAtom : public Error {
 public:
  using Error::Error;
};

enum class BridgeFailure { RankDeficient, ZeroBehaviorProb, Inconsistent };

// Raised by the exact bridge solvers. step() is 0-based.
class BridgeError : public Error {
 public:
  BridgeError(BridgeFailure kind, int step, const std::string& what)
      : Error(what), kind_(kind), step_(step) {}
  BridgeFailure kind() const { return kind_; }
  int step() const { return step_; }

 private:
  BridgeFailure kind_;
  int step_;
};

class DegenerateDual : public Error {
 public:
  using Error::Error;
};

class DegeneratePrimal : public Error {
 public:
  using Error::Error;
};

class EmptyRegion : public Error {
 public:
  using Error::Error;
};

}  // namespace p3o
