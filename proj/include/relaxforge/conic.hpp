#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "relaxforge/polynomial.hpp"
#include "relaxforge/rational.hpp"
#include "relaxforge/report.hpp"
#include "relaxforge/space.hpp"
#include "relaxforge/sym_matrix.hpp"

namespace relaxforge {

// Sparse symmetric matrix; the key (i,j) with i <= j stands for both A_ij and A_ji.
class SparseSym {
 public:
  void set(std::uint32_t i, std::uint32_t j, const Rational& v);
  void add(std::uint32_t i, std::uint32_t j, const Rational& v);
  // Adds c * x_a * x_b to the quadratic form x^T A x.
  void add_product(std::uint32_t a, std::uint32_t b, const Rational& c);
  Rational at(std::uint32_t i, std::uint32_t j) const;
  const std::map<std::pair<std::uint32_t, std::uint32_t>, Rational>& entries() const { return e_; }
  std::uint32_t max_index() const;

  Rational eval(const std::vector<Rational>& x) const;       // x^T A x
  Rational frobenius(const SymMatrixQ& z) const;             // <A, Z>
  Scalar frobenius(const std::vector<Vec>& vs) const;        // <A, Gram(vs)>

 private:
  std::map<std::pair<std::uint32_t, std::uint32_t>, Rational> e_;
};

enum class Mode { HQFP, SDFP };

struct Constraint {
  SparseSym A;
  Rational b;
  std::string label;
};

struct FeasibilityProblem {
  std::size_t n = 0;
  Mode mode = Mode::HQFP;
  std::vector<Constraint> constraints;
  std::vector<std::string> variables;  // optional names, empty or size n
};

FeasibilityProblem relax(const FeasibilityProblem& p);
void validate(const FeasibilityProblem& p);

struct Rank1 {
  std::vector<Rational> x;
};
struct VectorSolution {
  std::vector<Vec> v;
};
struct GramSolution {
  SymMatrixQ Z;
};
using PrimalSolution = std::variant<Rank1, VectorSolution, GramSolution>;

GramSolution lift(const Rank1& s);
VerificationReport verify_primal(const FeasibilityProblem& p, const PrimalSolution& s);

struct DualWitness {
  std::vector<Rational> w;
};

SymMatrixQ dual_matrix(const FeasibilityProblem& p, const DualWitness& w);
Rational dual_value(const FeasibilityProblem& p, const DualWitness& w);

struct DualReport {
  bool accepted = false;
  Rational value;  // <w, b>
  SymMatrixQ M;
  PsdCertificate certificate;
  std::size_t rank = 0;
  std::string reason;
};

DualReport verify_dual(const FeasibilityProblem& p, const DualWitness& w);

struct SosSquare {
  Rational weight;
  std::vector<std::pair<std::uint32_t, Rational>> form;
};

// sum_i multipliers[i] * p_i + sum_k weight_k * form_k^2 == constant, with
// p_i = sum_c x_c^T A_i x_c - b_i over the dim*dim variables x_{c*dim + j}.
struct Degree2SoSCert {
  std::size_t dim = 0;
  std::vector<Rational> multipliers;
  std::vector<SosSquare> squares;
  Rational constant;
};

std::uint32_t sos_var(std::size_t dim, std::size_t copy, std::size_t j);
std::vector<Polynomial> constraint_polynomials(const FeasibilityProblem& p);
Degree2SoSCert sos_from_dual(const FeasibilityProblem& p, const DualWitness& w);

struct SosReport {
  bool accepted = false;
  bool constant_negative = false;
  Polynomial lhs;
  std::optional<Monomial> first_mismatch;
  std::string reason;
};

SosReport verify_sos(const Degree2SoSCert& cert, const FeasibilityProblem& p);

}  // namespace relaxforge
