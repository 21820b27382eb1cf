#include "relaxforge/report.hpp"

namespace relaxforge {

std::string VerificationReport::summary() const {
  std::string s = accepted ? "accept" : "reject";
  s += " (" + std::to_string(checked) + " checks, " + std::to_string(violations.size()) + " violated)";
  for (std::size_t i = 0; i < violations.size() && i < 20; ++i) {
    const auto& v = violations[i];
    s += "\n  " + v.family + " at " + v.location;
    if (!v.input.empty()) s += " on " + v.input;
    s += ": expected " + v.expected + ", got " + v.actual;
  }
  if (violations.size() > 20) s += "\n  ...";
  return s;
}

}  // namespace relaxforge
