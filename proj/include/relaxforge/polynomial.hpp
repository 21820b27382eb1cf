#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relaxforge/rational.hpp"

namespace relaxforge {

// Sorted variable indices with repetition: {0, 0, 3} is x0^2 x3.
using Monomial = std::vector<std::uint32_t>;

class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(const Rational& c);  // NOLINT
  static Polynomial var(std::uint32_t i);

  const std::map<Monomial, Rational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  void add_term(Monomial m, const Rational& c);
  Rational coefficient(const Monomial& m) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Rational& c, const Polynomial& p);
  Polynomial& operator+=(const Polynomial& o);
  bool operator==(const Polynomial& o) const { return terms_ == o.terms_; }

  std::string str() const;

 private:
  std::map<Monomial, Rational> terms_;
};

std::string monomial_str(const Monomial& m);
// Smallest monomial whose coefficients differ.
std::optional<Monomial> first_difference(const Polynomial& a, const Polynomial& b);

}  // namespace relaxforge
