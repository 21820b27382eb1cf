#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "relaxforge/gamma2.hpp"
#include "relaxforge/protocol.hpp"
#include "relaxforge/qphp.hpp"
#include "relaxforge/report.hpp"
#include "relaxforge/space.hpp"

namespace relaxforge {

struct QLabProtocol {
  ProtocolStructure structure;
  SpacePtr space;
  int nx = 0;
  int ny = 0;
  std::vector<std::vector<Vec>> psi;  // psi[t][x * ny + y]

  const Vec& state(int t, int x, int y) const {
    return psi[static_cast<std::size_t>(t)][static_cast<std::size_t>(x * ny + y)];
  }
  Vec& state(int t, int x, int y) { return psi[static_cast<std::size_t>(t)][static_cast<std::size_t>(x * ny + y)]; }
};

// Root, Alice and Bob constraints.
VerificationReport verify_qlab_constraints(const QLabProtocol& pi);
// Leaves whose output is not allowed at (x,y) must carry the zero state there.
VerificationReport verify_qlab_computation(const QLabProtocol& pi, const RelationSpec& r);
VerificationReport verify_qlab(const QLabProtocol& pi, const RelationSpec& r);

// Sum of squared norms over the nodes at each depth (shallower leaves included), per input pair.
std::vector<std::vector<Scalar>> level_norms(const QLabProtocol& pi);
bool level_normalized(const QLabProtocol& pi);

// Registers 3 ⊗ 1' ⊗ 2' with basis {⊥, x's, y's} on 1' and 2'.
class QLabBasis {
 public:
  QLabBasis(int nx, int ny);
  const SpacePtr& space() const { return space_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int bot() const { return 0; }
  int xs(int x) const { return 1 + x; }
  int ys(int y) const { return 1 + nx_ + y; }
  AtomId atom(int r3, int r1, int r2) const;

 private:
  int nx_, ny_, dim_;
  SpacePtr space_;
  std::vector<AtomId> atoms_;
};

// Root Bob, depths 1 and 2 Alice, depth 3 Bob, leaves at depth 4 keeping the depth-3 state
// exactly when their last bit is f(x,y).
QLabProtocol universal_protocol(const RelationSpec& f);
QLabProtocol universal_protocol(const RelationSpec& f, const QLabBasis& basis);
// f(x,y) is bit (x * ny + y) of the table.
RelationSpec function_table(int nx, int ny, const std::vector<std::uint8_t>& bits);

// Last bit of the surviving leaves at every input pair, in x * ny + y order;
// nullopt when no leaf survives or surviving leaves disagree.
std::optional<std::vector<std::uint8_t>> output_column(const QLabProtocol& pi);

struct SweepResult {
  std::size_t tables = 0;
  std::size_t accepted = 0;       // verify_qlab accepted
  std::size_t outputs_match = 0;  // output column equals the table
  std::optional<std::vector<std::uint8_t>> first_failure;
};
// Universal protocol on all 2^(nx*ny) tables when exhaustive, otherwise on `samples` random ones.
SweepResult universal_sweep(int nx, int ny, bool exhaustive, std::size_t samples, std::uint64_t seed);

// psi_t(x,y) = alpha_t(x) ⊗ beta_t(y). Satisfies the protocol constraints for any gamma-2
// protocol; the computational ones hold when the protocol is classical.
QLabProtocol qlab_from_gamma2(const Gamma2Protocol& g);

struct MeasurementPair {
  int node = 0;
  Owner owner = Owner::Leaf;
  int input = 0;
  std::vector<Vec> zero;  // spans the outcome-0 branch
  std::vector<Vec> one;
  bool independent = true;  // false when the spans have irrational Gram entries and were only deduplicated
};
// Throws UnverifiedProtocol when the protocol constraints fail, or the spans fail to be orthogonal.
MeasurementPair extract_measurement(const QLabProtocol& pi, int t, int input);

struct TwoRoundWitness {
  int message = 0;
  int x = 0;
  int x2 = 0;
  Scalar overlap;
  int y = 0;  // Bob input on which f separates x and x2
  std::string conclusion;
};
// parts[x][t]: Alice's orthogonal decomposition of the common initial state on input x.
TwoRoundWitness two_round_violation(const std::vector<std::vector<Vec>>& parts);
TwoRoundWitness two_round_violation(const std::vector<std::vector<Vec>>& parts, const RelationSpec& r);
std::vector<std::vector<Vec>> alice_decomposition(const PigeonFamily& f);

}  // namespace relaxforge
