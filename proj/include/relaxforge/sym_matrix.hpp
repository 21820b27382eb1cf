#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "relaxforge/rational.hpp"

namespace relaxforge {

// Dense symmetric rational matrix; the stored grid is always symmetric.
class SymMatrixQ {
 public:
  SymMatrixQ() = default;
  explicit SymMatrixQ(std::size_t n) : n_(n), a_(n * n) {}
  static SymMatrixQ from_rows(const std::vector<std::vector<Rational>>& rows);
  static SymMatrixQ identity(std::size_t n);

  std::size_t size() const { return n_; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, const Rational& v);
  // Adds v at (i,j) and, off the diagonal, at (j,i) as well.
  void add(std::size_t i, std::size_t j, const Rational& v);
  Rational quad_form(const std::vector<Rational>& v) const;
  std::vector<std::vector<Rational>> rows() const;

  bool operator==(const SymMatrixQ& o) const { return n_ == o.n_ && a_ == o.a_; }

 private:
  std::size_t n_ = 0;
  std::vector<Rational> a_;
};

// P M P^T = L D L^T, with perm[i] the original index at position i and L unit lower triangular.
struct LdlFactor {
  std::vector<std::size_t> perm;
  std::vector<std::vector<Rational>> L;
  std::vector<Rational> D;
  std::size_t rank = 0;
};

// v^T M v = value < 0.
struct NegWitness {
  std::vector<Rational> v;
  Rational value;
};

using PsdCertificate = std::variant<LdlFactor, NegWitness>;

PsdCertificate psd_certificate(const SymMatrixQ& m);
// Re-checks a certificate against m by exact reconstruction or evaluation.
bool verify_certificate(const SymMatrixQ& m, const PsdCertificate& cert);
inline bool certifies_psd(const PsdCertificate& c) { return std::holds_alternative<LdlFactor>(c); }
std::size_t matrix_rank(const SymMatrixQ& m);

}  // namespace relaxforge
