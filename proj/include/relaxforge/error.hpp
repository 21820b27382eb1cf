#pragma once

#include <stdexcept>
#include <string>

namespace relaxforge {

enum class ErrorKind {
  DivisionByZero,
  UnsupportedDivision,
  NotRational,
  Overflow,
  NotPositive,
  NotSymmetric,
  DimensionMismatch,
  InfeasibleFlower,
  SpaceMismatch,
  IrrationalGram,
  UnknownAtom,
  ModeMismatch,
  DualNotVerified,
  NotARefutation,
  NotTight,
  IrrationalOverlap,
  InvalidSplit,
  InvalidFamily,
  DomainMismatch,
  UnverifiedProtocol,
  NonMaximalAntichain,
  Unsupported,
  TooLarge,
  CoefficientBound,
  NonLeafGraft,
  NoGuarantee,
  InvalidStructure,
  InvalidFormula,
  Parse,
  Composition,
  EmptySide,
  Usage,
};

const char* kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace relaxforge
