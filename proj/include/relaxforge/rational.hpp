#pragma once

#include <climits>
#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace relaxforge {

// Exact rational. Values whose reduced numerator and denominator fit in an
// int64 are kept inline; anything larger spills to GMP.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t v) : num_(v) {  // NOLINT: implicit is intended
    if (v == INT64_MIN) set_big(mpq_class(mpz_class(static_cast<long>(v))));
  }
  Rational(int v) : num_(v) {}  // NOLINT
  Rational(long long v) : Rational(static_cast<std::int64_t>(v)) {}  // NOLINT
  Rational(std::int64_t num, std::int64_t den);
  explicit Rational(const mpq_class& q);

  static Rational parse(std::string_view s);

  Rational(const Rational& o);
  Rational(Rational&&) noexcept = default;
  Rational& operator=(const Rational& o);
  Rational& operator=(Rational&&) noexcept = default;

  bool is_zero() const { return !big_ && num_ == 0; }
  bool is_one() const { return !big_ && num_ == 1 && den_ == 1; }
  int sign() const;
  bool is_integer() const;
  bool is_small() const { return !big_; }

  mpq_class to_mpq() const;
  mpz_class numerator() const;
  mpz_class denominator() const;
  std::string str() const;
  double to_double() const;

  Rational operator-() const;
  Rational abs() const { return sign() < 0 ? -*this : *this; }
  Rational inverse() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b);
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  std::size_t hash() const;

 private:
  static Rational from_wide(__int128 num, __int128 den);
  void set_big(mpq_class q);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  std::unique_ptr<mpq_class> big_;
};

Rational pow(const Rational& base, int exp);
std::ostream& operator<<(std::ostream& os, const Rational& r);

}  // namespace relaxforge
