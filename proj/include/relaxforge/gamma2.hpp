#pragma once

#include <map>
#include <optional>
#include <vector>

#include "relaxforge/conic.hpp"
#include "relaxforge/protocol.hpp"
#include "relaxforge/report.hpp"
#include "relaxforge/space.hpp"

namespace relaxforge {

struct Gamma2Protocol {
  ProtocolStructure structure;
  SpacePtr space;
  std::vector<std::vector<Vec>> alpha;  // alpha[t][x]
  std::vector<std::vector<Vec>> beta;   // beta[t][y]

  int nx() const { return alpha.empty() ? 0 : static_cast<int>(alpha[0].size()); }
  int ny() const { return beta.empty() ? 0 : static_cast<int>(beta[0].size()); }
};

// Root, Alice and Bob constraints only.
VerificationReport verify_protocol_constraints(const Gamma2Protocol& pi);
// The computational constraints against r. A leaf without an output reading
// (no label and no binary suffix of length k) must vanish on every input pair.
VerificationReport verify_computation(const Gamma2Protocol& pi, const RelationSpec& r);
VerificationReport verify_gamma2(const Gamma2Protocol& pi, const RelationSpec& r);

// Variables A_t(x) at t*(nx+ny)+x and B_t(y) at t*(nx+ny)+nx+y.
std::uint32_t protocol_var_a(int nx, int ny, int t, int x);
std::uint32_t protocol_var_b(int nx, int ny, int t, int y);
FeasibilityProblem protocol_hqfp(const RelationSpec& r, const ProtocolStructure& s);
// The protocol's vectors in the variable order of protocol_hqfp.
VectorSolution protocol_vectors(const Gamma2Protocol& pi);

using NodeMatrix = std::vector<std::vector<Scalar>>;
NodeMatrix node_matrix(const Gamma2Protocol& pi, int t);
// Throws UnverifiedProtocol when the node constraints fail.
VerificationReport structure_check(const Gamma2Protocol& pi);
bool leaf_sum_check(const Gamma2Protocol& pi, const std::vector<int>& antichain);
void require_maximal_antichain(const ProtocolStructure& s, const std::vector<int>& antichain);

struct DecompositionCheck {
  bool holds = false;
  std::size_t one_leaves = 0;  // |L_1|, the certified gamma-2 upper bound
  std::vector<int> leaves;
};
DecompositionCheck mf_decomposition_check(const Gamma2Protocol& pi, const RelationSpec& f);

// Discrepancy under mu(x,y) of the 0/1 matrix f. Refuses matrices wider than the cap.
int discrepancy_cap();
Rational discrepancy(const std::vector<std::vector<int>>& f, const std::vector<std::vector<Rational>>& mu);
Rational disc_uniform(const std::vector<std::vector<int>>& f);

struct EqualityCoefficients {
  Scalar c;
  Scalar p;
  Scalar q;
  Scalar r;
  Rational cp;
  Rational cq;
  Rational p2;
  Rational q2;
  Rational r2;
};
EqualityCoefficients equality_coefficients(int l, int d);

// Atoms of the equality construction inside one space. Flowers for a given l
// and the per-d simplex and chi atoms are created once and reused.
class EqualityAtoms {
 public:
  explicit EqualityAtoms(SpacePtr space);
  const SpacePtr& space() const { return space_; }
  AtomId psi() const { return psi_; }
  const FlowerFamily& phi(int l);
  const FlowerFamily& rho(int l);
  const FlowerFamily& eta(int d);
  const std::vector<AtomId>& chi(int d);

 private:
  SpacePtr space_;
  AtomId psi_;
  std::map<int, FlowerFamily> phi_, rho_, eta_;
  std::map<int, std::vector<AtomId>> chi_;
};

Gamma2Protocol equality_protocol(int l, int d);
Gamma2Protocol equality_protocol(int l, int d, EqualityAtoms& atoms);
// Builds with caller supplied coefficients and skips the coefficient bound.
Gamma2Protocol equality_protocol_with(int l, int d, const EqualityCoefficients& k, EqualityAtoms& atoms);

struct Graft {
  int leaf = 0;
  Gamma2Protocol protocol;
  std::vector<int> x_map;  // composite Alice input -> graft input; empty means identity
  std::vector<int> y_map;
};

// alpha'_t(x') = alpha_t(a(x')), beta'_t(y') = beta_t(b(y')).
Gamma2Protocol reindex(const Gamma2Protocol& pi, const std::vector<int>& a, const std::vector<int>& b);
Gamma2Protocol compose_sequential(const Gamma2Protocol& base, const std::vector<Graft>& grafts,
                                  const RelationSpec* r = nullptr);

}  // namespace relaxforge
