#pragma once

#include <optional>
#include <string>
#include <vector>

#include "relaxforge/conic.hpp"
#include "relaxforge/report.hpp"
#include "relaxforge/space.hpp"

namespace relaxforge {

// Variable layout of the pigeonhole problem: lambda is 0, v_{i,j} is 1 + i*h + j (0-based i, j).
std::uint32_t php_var(int h, int i, int j);
FeasibilityProblem php_negation_hqfp(int p, int h);
// Dual weights in constraint order; the resulting matrix has entries 1 at (lambda, lambda),
// -1/h between lambda and every part, and 1/h between parts sharing a hole.
DualWitness qphp_dual_witness(int p, int h);
// Same weights without the p > h check.
DualWitness qphp_dual_template(int p, int h);

struct PigeonFamily {
  int p = 0;
  int h = 0;
  SpacePtr space;
  std::vector<Vec> initial;             // v_i
  std::vector<std::vector<Vec>> parts;  // parts[i][j] = v_{i,j}
};

VerificationReport verify_family(const PigeonFamily& f);
// Identical pigeons; pigeon i lands wholly in hole assignment[i].
PigeonFamily classical_family(int p, int h, const std::vector<int>& assignment);
Rational quantitative_bound(int p, int h, const Rational& beta);
PigeonFamily tight_example(int p, int h, const Rational& beta);

struct Overlap {
  Rational value;
  int i = 0;
  int i2 = 0;
  int j = 0;
};
Overlap max_overlap(const PigeonFamily& f);

struct BoundCheck {
  Rational beta;
  Rational bound;
  Overlap overlap;
  bool holds = false;
  bool tight = false;
};
BoundCheck check_quantitative_bound(const PigeonFamily& f);

struct SymmetrizedSummary {
  Rational beta;                // <w_i, w_i'>
  Rational part_norm;           // <w_ij, w_ij>
  Rational alpha_sym;           // <w_ij, w_i'j>
  Rational initial_part;        // <w_i, w_ij>
  Rational initial_other_part;  // <w_i, w_i'j>
  Rational same_pigeon;         // <w_ij, w_ij'>
  Rational cross;               // <w_ij, w_i'j'>
  bool not_above_max = false;
};
SymmetrizedSummary symmetrize(const PigeonFamily& f);

struct WeakCheck {
  Rational lhs;  // |sum_i psi_i|^2
  Rational rhs;  // 2 (|sum_i psi_i0|^2 + |sum_i psi_i1|^2)
  bool holds = false;
};
// split[i] = {psi_i0, psi_i1}
WeakCheck weak_qphp_check(const std::vector<Vec>& psi, const std::vector<std::pair<Vec, Vec>>& split,
                          bool assert_orthogonal = false);

struct WeakStep {
  std::vector<int> holes;  // holes kept after this step
  Rational value;          // |sum_i sum_{j in holes} v_ij|^2
};
struct WeakTrace {
  Rational start;
  std::vector<WeakStep> steps;
  int final_hole = 0;
  Rational final_value;
  Rational guaranteed;  // p^2 / 4^ceil(log2 h)
  std::optional<Overlap> witness;
  bool from_trace = false;  // witness read off the final hole rather than a global scan
};
WeakTrace iterate_weak_qphp(const PigeonFamily& f);

}  // namespace relaxforge
