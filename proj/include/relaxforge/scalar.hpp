#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <boost/container/small_vector.hpp>

#include "relaxforge/rational.hpp"

namespace relaxforge {

// An element of Q extended by square roots of integers, kept as a sum
// c_1 sqrt(r_1) + ... with squarefree r_i strictly increasing and c_i != 0.
// The representation is canonical, so structural equality is value equality.
class Scalar {
 public:
  struct Term {
    Rational coef;
    std::uint64_t radicand;  // squarefree, >= 1
    bool operator==(const Term&) const = default;
  };
  using Terms = boost::container::small_vector<Term, 2>;

  Scalar() = default;
  Scalar(const Rational& q);  // NOLINT: implicit lift from Q
  Scalar(std::int64_t v) : Scalar(Rational(v)) {}  // NOLINT
  Scalar(int v) : Scalar(Rational(v)) {}           // NOLINT

  // c * sqrt(r) for an arbitrary nonnegative integer r; square factors are pulled out.
  static Scalar surd(const Rational& c, std::uint64_t r);
  // Exact square root of a nonnegative rational.
  static Scalar sqrt(const Rational& q);
  static Scalar from_terms(Terms terms);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_rational() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].radicand == 1); }
  std::optional<Rational> as_rational() const;
  Rational to_rational() const;  // throws NotRational
  // Exact sign; supported for up to two surd terms.
  int sign() const;
  double to_double() const;
  std::string str() const;

  Scalar operator-() const;
  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  // Only divisors with a single surd term are supported.
  friend Scalar operator/(const Scalar& a, const Scalar& b);
  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  Scalar& operator/=(const Scalar& o) { return *this = *this / o; }

  friend bool operator==(const Scalar& a, const Scalar& b) { return a.terms_ == b.terms_; }

 private:
  void add_term(const Rational& c, std::uint64_t r);
  Terms terms_;
};

// Writes n = s^2 * r with r squarefree.
void squarefree_split(std::uint64_t n, std::uint64_t& square_root_part, std::uint64_t& squarefree_part);

std::ostream& operator<<(std::ostream& os, const Scalar& s);

}  // namespace relaxforge
