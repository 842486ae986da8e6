#pragma once

#include <stdexcept>
#include <string>

namespace cfaforge {

struct SourcePos {
  int line = 0;
  int column = 0;
};

inline std::string to_string(SourcePos p) {
  return std::to_string(p.line) + ":" + std::to_string(p.column);
}

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg, SourcePos pos = {})
      : std::runtime_error(pos.line > 0 ? kind + " at " + to_string(pos) + ": " + msg
                                        : kind + ": " + msg),
        kind_(std::move(kind)),
        pos_(pos) {}

  const std::string& kind() const { return kind_; }
  SourcePos pos() const { return pos_; }

 private:
  std::string kind_;
  SourcePos pos_;
};

class LexError : public Error {
 public:
  LexError(const std::string& msg, SourcePos pos) : Error("LexError", msg, pos) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, SourcePos pos) : Error("ParseError", msg, pos) {}
};

class UnsupportedFeatureError : public Error {
 public:
  UnsupportedFeatureError(const std::string& feature, SourcePos pos = {})
      : Error("UnsupportedFeatureError", feature, pos) {}
};

class TypeError : public Error {
 public:
  TypeError(const std::string& msg, SourcePos pos = {}) : Error("TypeError", msg, pos) {}
};

class RecursionError : public Error {
 public:
  explicit RecursionError(const std::string& cycle) : Error("RecursionError", cycle) {}
};

class MissingMainError : public Error {
 public:
  MissingMainError() : Error("MissingMainError", "program has no main function") {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& msg) : Error("InternalError", msg) {}
};

class NoExitPathError : public Error {
 public:
  explicit NoExitPathError(const std::string& msg) : Error("NoExitPathError", msg) {}
};

class NoAssertError : public Error {
 public:
  NoAssertError() : Error("NoAssertError", "program contains no assertions") {}
};

class UnknownPredicateError : public Error {
 public:
  explicit UnknownPredicateError(const std::string& msg) : Error("UnknownPredicateError", msg) {}
};

class ExternalSolverError : public Error {
 public:
  explicit ExternalSolverError(const std::string& msg) : Error("ExternalSolverError", msg) {}
};

class RefinementStuck : public Error {
 public:
  RefinementStuck() : Error("RefinementStuck", "no new predicates from counterexample") {}
};

}  // namespace cfaforge
