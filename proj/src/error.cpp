#include "relaxforge/error.hpp"

namespace relaxforge {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::DivisionByZero:
      return "DivisionByZero";
    case ErrorKind::UnsupportedDivision:
      return "UnsupportedDivision";
    case ErrorKind::NotRational:
      return "NotRational";
    case ErrorKind::Overflow:
      return "Overflow";
    case ErrorKind::NotPositive:
      return "NotPositive";
    case ErrorKind::NotSymmetric:
      return "NotSymmetric";
    case ErrorKind::DimensionMismatch:
      return "DimensionMismatch";
    case ErrorKind::InfeasibleFlower:
      return "InfeasibleFlower";
    case ErrorKind::SpaceMismatch:
      return "SpaceMismatch";
    case ErrorKind::IrrationalGram:
      return "IrrationalGram";
    case ErrorKind::UnknownAtom:
      return "UnknownAtom";
    case ErrorKind::ModeMismatch:
      return "ModeMismatch";
    case ErrorKind::DualNotVerified:
      return "DualNotVerified";
    case ErrorKind::NotARefutation:
      return "NotARefutation";
    case ErrorKind::NotTight:
      return "NotTight";
    case ErrorKind::IrrationalOverlap:
      return "IrrationalOverlap";
    case ErrorKind::InvalidSplit:
      return "InvalidSplit";
    case ErrorKind::InvalidFamily:
      return "InvalidFamily";
    case ErrorKind::DomainMismatch:
      return "DomainMismatch";
    case ErrorKind::UnverifiedProtocol:
      return "UnverifiedProtocol";
    case ErrorKind::NonMaximalAntichain:
      return "NonMaximalAntichain";
    case ErrorKind::Unsupported:
      return "Unsupported";
    case ErrorKind::TooLarge:
      return "TooLarge";
    case ErrorKind::CoefficientBound:
      return "CoefficientBound";
    case ErrorKind::NonLeafGraft:
      return "NonLeafGraft";
    case ErrorKind::NoGuarantee:
      return "NoGuarantee";
    case ErrorKind::InvalidStructure:
      return "InvalidStructure";
    case ErrorKind::InvalidFormula:
      return "InvalidFormula";
    case ErrorKind::Parse:
      return "Parse";
    case ErrorKind::Composition:
      return "Composition";
    case ErrorKind::EmptySide:
      return "EmptySide";
    case ErrorKind::Usage:
      return "Usage";
  }
  return "Unknown";
}

}  // namespace relaxforge
