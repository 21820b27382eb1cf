#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relaxforge/conic.hpp"
#include "relaxforge/gamma2.hpp"
#include "relaxforge/protocol.hpp"

namespace relaxforge {

// f on n bits; entry x is f(x), and coordinate i (0-based) of x is bit i.
struct TruthTable {
  int n = 0;
  std::vector<std::uint8_t> f;

  static TruthTable from_hex(int n, const std::string& hex);
  std::string hex() const;
  bool operator()(std::uint64_t x) const { return f.at(x) != 0; }
  bool is_constant() const;
};

// Inputs are named x_1 .. x_n left to right.
std::string input_name(std::uint64_t x, int n);
// X = f^-1(1), Y = f^-1(0), outputs are 0-based coordinates in max(1, ceil(log2 n)) bits.
RelationSpec kw_relation(const TruthTable& f);
std::vector<std::uint64_t> kw_side(const TruthTable& f, bool value);

struct Formula {
  enum class Kind { Const, Lit, Not, And, Or };
  Kind kind = Kind::Const;
  bool value = false;    // Const: the constant; Lit: negated
  int var = 0;           // Lit: 0-based variable
  std::vector<Formula> kids;

  static Formula constant(bool v);
  static Formula lit(int var, bool negated = false);
  static Formula negate(Formula f);
  static Formula conj(std::vector<Formula> k);
  static Formula disj(std::vector<Formula> k);

  bool eval(std::uint64_t x) const;
  int max_var() const;  // -1 when there are no variables
  int depth() const;
  std::string str() const;
  bool operator==(const Formula&) const = default;
};

// Grammar: or := and ('|' and)*, and := unary ('&' unary)*, unary := '!' unary | '(' or ')' | x<i> | 0 | 1.
// Variables are 1-based in text.
Formula parse_formula(const std::string& text);
// Negation normal form with constants folded.
Formula nnf(const Formula& f);
// Binary gates with AND and OR alternating; a gate above a gate of its own kind
// gets the child duplicated under the opposite kind.
Formula normalize(const Formula& f);
bool is_alternating(const Formula& f);
TruthTable truth_table(const Formula& f, int n);

// Normalized formula laid out as a protocol tree: OR gates are Alice nodes,
// AND gates Bob nodes, literal leaves labelled with their variable index.
struct CircuitAssignment {
  int n = 0;
  int k = 1;
  Formula formula;
  ProtocolStructure shape;
  std::vector<Formula> gates;            // gate at each structure node
  std::vector<std::vector<std::uint8_t>> out;  // out[x][t] = Out_x(t) for x in [2^n]
};
CircuitAssignment circuit_assignment(const Formula& f, int n);

Gamma2Protocol protocol_from_formula(const Formula& f, int n);
// The same protocol as a rank-1 point of protocol_hqfp(kw_relation(f), shape).
Rank1 hqfp_embedding(const Formula& f, int n);

struct KwProtocol {
  Gamma2Protocol protocol;
  RelationSpec relation;
  int equality_calls = 0;
  int edge_depth = 0;
  int speaker_rounds = 0;
  int bit_depth = 0;
};
KwProtocol kw_via_equality(const TruthTable& f);

}  // namespace relaxforge
