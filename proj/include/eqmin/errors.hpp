#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eqmin {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// core_terms
class NoMatch : public Error {
 public:
  using Error::Error;
};
class BadPosition : public Error {
 public:
  using Error::Error;
};

// calculus
class NotUnifiable : public Error {
 public:
  using Error::Error;
};
class PositionIsVariable : public Error {
 public:
  using Error::Error;
};

// proof_io
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};
class UnsupportedLogic : public Error {
 public:
  using Error::Error;
};
class DanglingReference : public Error {
 public:
  using Error::Error;
};

// redirect
class NotARefutation : public Error {
 public:
  using Error::Error;
};
class MultipleGoalPaths : public Error {
 public:
  using Error::Error;
};

// orchestrator / combine
class MissingLemmaProof : public Error {
 public:
  using Error::Error;
};
class CycleDetected : public Error {
 public:
  using Error::Error;
};
class SegmentUnprovable : public Error {
 public:
  using Error::Error;
};
class CertificationFailed : public Error {
 public:
  using Error::Error;
};
class NoBaseline : public Error {
 public:
  using Error::Error;
};

// emit
class UncertifiedProof : public Error {
 public:
  using Error::Error;
};

}  // namespace eqmin
