#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace relaxforge {

struct Violation {
  std::string family;  // which constraint family failed
  std::string location;
  std::string input;   // input witness, empty when not input specific
  std::string expected;
  std::string actual;
};

struct VerificationReport {
  bool accepted = true;
  std::size_t checked = 0;
  std::vector<Violation> violations;

  void check(bool ok, Violation v) {
    ++checked;
    if (!ok) add(std::move(v));
  }
  void add(Violation v) {
    accepted = false;
    violations.push_back(std::move(v));
  }
  void merge(const VerificationReport& o) {
    checked += o.checked;
    for (const auto& v : o.violations) add(v);
  }
  std::string summary() const;
};

}  // namespace relaxforge
